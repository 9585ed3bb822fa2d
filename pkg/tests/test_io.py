"""File formats: calibration JSON, CSV flavors, PLY, scene directories."""

import json

import numpy as np
import pytest

from slender3d import io as sio
from slender3d.curves import Curve3D, polyline_lengths
from slender3d.errors import ParseError
from slender3d.matching import CorrespondenceSet
from slender3d.metrics import evaluate
from slender3d.ordering import OrderedSequence
from slender3d.pipeline import make_scene
from slender3d.synth import make_rig


class TestCalibration:
    def test_round_trip(self, tmp_path):
        rig = make_rig("carm_30deg")
        path = tmp_path / "calib.json"
        sio.write_calibration(rig, path)
        loaded = sio.read_calibration(path)
        assert loaded.image_size == rig.image_size
        assert np.allclose(loaded.fundamental, rig.fundamental)
        for cam_a, cam_b in ((rig.cam1, loaded.cam1), (rig.cam2, loaded.cam2)):
            assert np.allclose(cam_a.pose.rotation, cam_b.pose.rotation)
            assert np.allclose(cam_a.pose.translation, cam_b.pose.translation)
            assert cam_a.intrinsics == cam_b.intrinsics

    def test_schema_fields(self, tmp_path):
        rig = make_rig("orthogonal")
        path = tmp_path / "calib.json"
        sio.write_calibration(rig, path)
        doc = json.loads(path.read_text())
        assert doc["units"] == "mm"
        for key in ("camera1", "camera2"):
            block = doc[key]
            for field in ("fx", "fy", "cx", "cy", "skew", "rotation", "translation", "width", "height"):
                assert field in block
            assert len(block["rotation"]) == 9
            assert len(block["translation"]) == 3

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "calib.json"
        path.write_text('{\n"camera1": }\n')
        with pytest.raises(ParseError, match="line 2"):
            sio.read_calibration(path)


class TestCsvFormats:
    def test_ordered_round_trip(self, tmp_path):
        seq = OrderedSequence(view_id=1, points=np.array([[1.5, 2.25], [3.0, 4.0]]))
        path = tmp_path / "seq.csv"
        sio.write_ordered_csv(seq, path)
        assert path.read_text().splitlines()[0] == "index,u,v"
        loaded = sio.read_ordered_csv(path, view_id=1)
        assert np.allclose(loaded.points, seq.points)

    def test_curve_round_trip_with_residuals(self, tmp_path):
        curve = Curve3D(
            points=np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
            residuals_view1=np.array([0.1, 0.2]),
            residuals_view2=np.array([0.3, 0.4]),
        )
        path = tmp_path / "curve3d.csv"
        sio.write_curve_csv(curve, path)
        assert path.read_text().splitlines()[0] == "index,x,y,z,res1_px,res2_px"
        loaded = sio.read_curve_csv(path)
        assert np.allclose(loaded.points, curve.points)
        assert np.allclose(loaded.residuals_view1, curve.residuals_view1)

    def test_gt_curve_round_trip(self, tmp_path):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        curve = Curve3D(points=pts, arclength=polyline_lengths(pts))
        path = tmp_path / "gt_curve.csv"
        sio.write_gt_curve_csv(curve, path)
        assert path.read_text().splitlines()[0] == "index,s,x,y,z"
        loaded = sio.read_curve_csv(path)
        assert np.allclose(loaded.points, pts)
        assert np.allclose(loaded.arclength, curve.arclength)

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("index,x,y,z\n0,1,2,3\n1,oops,5,6\n")
        with pytest.raises(ParseError, match="line 3"):
            sio.read_curve_csv(path)

    def test_correspondences_format(self, tmp_path):
        corr = CorrespondenceSet(
            view1_points=np.array([[1.0, 2.0], [3.5, 4.5]]),
            view2_points=np.array([[5.0, 6.0], [7.0, 8.0]]),
            costs=np.array([0.1, 0.2]),
            row_param=np.array([0.0, 1.0]),
            anchor_rows=np.array([[0, 0], [0, 1]]),
        )
        path = tmp_path / "corr.csv"
        sio.write_correspondences_csv(corr, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "j,u1,v1,u2,v2,cost"
        assert lines[1] == "0,1,2,5,6,0.1"


class TestPly:
    def test_polyline_structure(self, tmp_path):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
        curve = Curve3D(points=pts)
        path = tmp_path / "curve.ply"
        sio.write_curve_ply(curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "ply"
        assert "element vertex 3" in lines
        assert "element edge 2" in lines
        header_end = lines.index("end_header")
        vertices = lines[header_end + 1 : header_end + 4]
        assert vertices[0].split() == ["0", "0", "0"]
        edges = lines[header_end + 4 :]
        assert edges == ["0 1", "1 2"]


class TestSceneDirectory:
    def test_file_census_and_reload(self, tmp_path):
        bundle = make_scene(4, "orthogonal")
        manifest = sio.write_scene(bundle, tmp_path / "scene", extra={"seed": 4})
        names = sorted(p.name for p in (tmp_path / "scene").iterdir())
        assert names == sorted(sio.SCENE_FILES)
        doc = json.loads(manifest.read_text())
        assert doc["seed"] == 4
        assert doc["curve_spec"]["seed"] == 4
        # reload the pieces and sanity check against the originals
        rig = sio.read_calibration(tmp_path / "scene" / "calib.json")
        assert np.allclose(rig.fundamental, bundle.rig.fundamental)
        gt = sio.read_curve_csv(tmp_path / "scene" / "gt_curve.csv")
        m = evaluate(gt, bundle.curve, gt_resample=0)
        assert m.max_error < 1e-6
        s1 = sio.read_ordered_csv(tmp_path / "scene" / "gt_order_view1.csv", 1)
        assert np.allclose(s1.points, bundle.ordered_pixels[0].points, atol=1e-7)
