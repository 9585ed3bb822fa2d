"""On-disk formats: calibration JSON, CSV curve/sequence files, PLY, scenes.

All writers format floats with repr-faithful "%.10g" and emit sorted JSON
keys, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .camera import Camera, Intrinsics, Pose, StereoRig
from .centerline import Centerline, save_mask
from .curves import Curve3D
from .errors import ParseError
from .matching import CorrespondenceSet
from .metrics import ReconMetrics
from .ordering import OrderedSequence
from .synth import SceneBundle

_FLOAT_FMT = "%.10g"


def _fmt(x: float) -> str:
    return _FLOAT_FMT % float(x)


# --- calibration ---------------------------------------------------------


def _camera_block(cam: Camera, image_size) -> dict:
    h, w = image_size
    return {
        "fx": cam.intrinsics.fx,
        "fy": cam.intrinsics.fy,
        "cx": cam.intrinsics.cx,
        "cy": cam.intrinsics.cy,
        "skew": cam.intrinsics.skew,
        "rotation": [float(x) for x in cam.pose.rotation.reshape(-1)],
        "translation": [float(x) for x in cam.pose.translation],
        "width": int(w),
        "height": int(h),
    }


def write_calibration(rig: StereoRig, path) -> None:
    doc = {
        "units": "mm",
        "camera1": _camera_block(rig.cam1, rig.image_size),
        "camera2": _camera_block(rig.cam2, rig.image_size),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _camera_from_block(block: dict, path) -> tuple[Camera, tuple[int, int]]:
    try:
        intr = Intrinsics(
            fx=float(block["fx"]),
            fy=float(block["fy"]),
            cx=float(block["cx"]),
            cy=float(block["cy"]),
            skew=float(block.get("skew", 0.0)),
        )
        pose = Pose(
            rotation=np.array(block["rotation"], dtype=float).reshape(3, 3),
            translation=np.array(block["translation"], dtype=float),
        )
        size = (int(block["height"]), int(block["width"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{path}: bad camera block: {exc}") from exc
    return Camera(intrinsics=intr, pose=pose), size


def read_calibration(path) -> StereoRig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if "camera1" not in doc or "camera2" not in doc:
        raise ParseError(f"{path}: missing camera1/camera2 blocks")
    cam1, size1 = _camera_from_block(doc["camera1"], path)
    cam2, size2 = _camera_from_block(doc["camera2"], path)
    if size1 != size2:
        raise ParseError(f"{path}: views disagree on image size: {size1} vs {size2}")
    return StereoRig(cam1=cam1, cam2=cam2, image_size=size1)


# --- CSV formats ----------------------------------------------------------


def _read_csv_rows(path, expected_header: str | None = None):
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ParseError(f"{path}: line 1: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if expected_header is not None and header != expected_header.split(","):
        raise ParseError(f"{path}: line 1: expected header {expected_header!r}")
    rows = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"{path}: line {n}: {exc}") from exc
        if len(cells) != len(header):
            raise ParseError(f"{path}: line {n}: expected {len(header)} columns")
    return header, rows


def write_ordered_csv(seq: OrderedSequence, path) -> None:
    with open(path, "w") as f:
        f.write("index,u,v\n")
        for k, (u, v) in enumerate(np.asarray(seq.points)):
            f.write(f"{k},{_fmt(u)},{_fmt(v)}\n")


def read_ordered_csv(path, view_id: int) -> OrderedSequence:
    _, rows = _read_csv_rows(path, "index,u,v")
    if not rows:
        raise ParseError(f"{path}: line 2: no points")
    pts = np.array([[r[1], r[2]] for r in rows])
    return OrderedSequence(view_id=view_id, points=pts)


def write_centerline_csv(cl: Centerline, path) -> None:
    with open(path, "w") as f:
        f.write("u,v,degree\n")
        for (u, v), deg in zip(cl.points, cl.degrees):
            f.write(f"{u},{v},{deg}\n")


def write_correspondences_csv(corr: CorrespondenceSet, path) -> None:
    with open(path, "w") as f:
        f.write("j,u1,v1,u2,v2,cost\n")
        for j in range(len(corr)):
            u1, v1 = corr.view1_points[j]
            u2, v2 = corr.view2_points[j]
            f.write(f"{j},{_fmt(u1)},{_fmt(v1)},{_fmt(u2)},{_fmt(v2)},{_fmt(corr.costs[j])}\n")


def write_curve_csv(curve: Curve3D, path) -> None:
    """Reconstruction format: index,x,y,z,res1_px,res2_px."""
    r1 = curve.residuals_view1
    r2 = curve.residuals_view2
    with open(path, "w") as f:
        f.write("index,x,y,z,res1_px,res2_px\n")
        for k, (x, y, z) in enumerate(curve.points):
            a = _fmt(r1[k]) if r1 is not None else "0"
            b = _fmt(r2[k]) if r2 is not None else "0"
            f.write(f"{k},{_fmt(x)},{_fmt(y)},{_fmt(z)},{a},{b}\n")


def write_gt_curve_csv(curve: Curve3D, path) -> None:
    """Ground-truth format: index,s,x,y,z with s the arc length in mm."""
    s = curve.arclength
    if s is None:
        raise ValueError("ground-truth curve needs arc-length parameters")
    with open(path, "w") as f:
        f.write("index,s,x,y,z\n")
        for k, (x, y, z) in enumerate(curve.points):
            f.write(f"{k},{_fmt(s[k])},{_fmt(x)},{_fmt(y)},{_fmt(z)}\n")


def read_curve_csv(path) -> Curve3D:
    """Read either curve CSV flavor; columns are located by header name."""
    header, rows = _read_csv_rows(path)
    cols = {name: k for k, name in enumerate(header)}
    for required in ("x", "y", "z"):
        if required not in cols:
            raise ParseError(f"{path}: line 1: missing column {required!r}")
    if not rows:
        raise ParseError(f"{path}: line 2: no points")
    data = np.array(rows)
    pts = data[:, [cols["x"], cols["y"], cols["z"]]]
    kwargs = {}
    if "s" in cols:
        kwargs["arclength"] = data[:, cols["s"]]
    if "res1_px" in cols and "res2_px" in cols:
        kwargs["residuals_view1"] = data[:, cols["res1_px"]]
        kwargs["residuals_view2"] = data[:, cols["res2_px"]]
    return Curve3D(points=pts, **kwargs)


def write_curve_ply(curve: Curve3D, path) -> None:
    """ASCII PLY with the curve as a vertex list plus a polyline edge list."""
    n = len(curve.points)
    with open(path, "w") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {n}\n")
        f.write("property float x\nproperty float y\nproperty float z\n")
        f.write(f"element edge {max(0, n - 1)}\n")
        f.write("property int vertex1\nproperty int vertex2\n")
        f.write("end_header\n")
        for x, y, z in curve.points:
            f.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
        for k in range(n - 1):
            f.write(f"{k} {k + 1}\n")


def write_metrics_json(metrics: ReconMetrics, path) -> None:
    Path(path).write_text(json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n")


# --- scene bundles ----------------------------------------------------------

SCENE_FILES = (
    "calib.json",
    "view1.pgm",
    "view2.pgm",
    "gt_curve.csv",
    "gt_order_view1.csv",
    "gt_order_view2.csv",
    "manifest.json",
)


def write_scene(bundle: SceneBundle, out_dir, extra: dict | None = None) -> Path:
    """Write the scene-directory interchange layout; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_calibration(bundle.rig, out / "calib.json")
    save_mask(out / "view1.pgm", bundle.masks[0])
    save_mask(out / "view2.pgm", bundle.masks[1])
    write_gt_curve_csv(bundle.curve, out / "gt_curve.csv")
    write_ordered_csv(bundle.ordered_pixels[0], out / "gt_order_view1.csv")
    write_ordered_csv(bundle.ordered_pixels[1], out / "gt_order_view2.csv")
    manifest = {
        "stroke_px": bundle.stroke_px,
        "image_size": list(bundle.rig.image_size),
        "files": [name for name in SCENE_FILES if name != "manifest.json"],
    }
    if bundle.spec is not None:
        manifest["curve_spec"] = asdict(bundle.spec)
    if extra:
        manifest.update(extra)
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path
