"""End-to-end orchestration: masks or ordered points in, 3D curve out.

The heavy lifting lives in the stage modules; this one wires them
together with a single configuration object, stage timing, and the
scene-directory conventions used by the CLI and the benchmark loop.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import io as sio
from .camera import StereoRig
from .centerline import Centerline, extract_centerline, load_mask, save_mask, skeletonize
from .curves import Curve3D
from .errors import NoEndpoints, Slender3dError, StageFailure
from .matching import CorrespondenceSet, cost_matrix, dp_align, reconstruct, refine
from .metrics import ReconMetrics, evaluate
from .ordering import OrderedSequence, TraversalParams, ranked_start_pairs, traverse
from .synth import CurveSpec, SceneBundle, gen_curve, make_rig, render_views

INPUT_MODES = ("masks", "ordered_points")


@dataclass
class PipelineConfig:
    """Every tunable of the reconstruction in one document.

    Defaults match the reference operating point (lambda_a = 1.0,
    lambda_d = 0.5, r_max = 50). A JSON config file carries the same keys;
    CLI flags override individual entries.
    """

    lambda_a: float = 1.0
    lambda_d: float = 0.5
    r_max: int = 50
    window_m: int = 10
    curvature_window_min: int = 4
    degenerate_penalty: float | None = None
    vertical_refine: bool = False
    symmetric_distance: bool = False
    gt_resample_factor: int = 10
    input_mode: str = "masks"
    scene_dir: str | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")

    @property
    def traversal_params(self) -> TraversalParams:
        return TraversalParams(
            lambda_a=self.lambda_a,
            lambda_d=self.lambda_d,
            r_max=self.r_max,
            window_m=self.window_m,
            curvature_window_min=self.curvature_window_min,
        )

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        doc = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


class _Stages:
    """Names and times each stage; failures carry the stage name."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except (Slender3dError, OSError) as exc:
            raise StageFailure(name, exc) from exc
        self.timings[name] = time.perf_counter() - t0
        return result


def _closed_curve_start(cl: Centerline) -> np.ndarray:
    """Fallback seed for endpoint-free skeletons: minimum (v, u) pixel."""
    order = np.lexsort((cl.points[:, 0], cl.points[:, 1]))
    return cl.points[order[0]]


LONG_JUMP_PX = 6.0
RESTART_RADIUS_PX = 5.0
ACCEPTABLE_ORDER_SCORE = 2.0


def _order_score(seq: OrderedSequence, cl: Centerline) -> float:
    """Traversal quality without ground truth.

    Penalizes missed coverage, long jumps, and above all the restart
    signature: a long jump that lands back beside the sequence start,
    which is what a traversal seeded at a mid-curve artifact endpoint
    produces when it exhausts one side and doubles back. A legitimate
    occlusion hop jumps forward, far from the start, and costs little.
    """
    pts = np.asarray(seq.points, dtype=float)
    score = 5.0 * (1.0 - len(seq) / max(1, len(cl)))
    if len(pts) < 2:
        return score + 5.0
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    for k in np.nonzero(steps > LONG_JUMP_PX)[0]:
        score += 1.0
        if np.linalg.norm(pts[k + 1] - pts[0]) < RESTART_RADIUS_PX:
            score += 3.0
    return score


def order_centerlines(
    cl1: Centerline, cl2: Centerline, rig: StereoRig, params: TraversalParams
) -> tuple[OrderedSequence, OrderedSequence]:
    """Pick cross-view consistent starts and traverse both views.

    Endpoint pairs are tried in order of epipolar consistency; the first
    pair whose two traversals come out acceptably clean wins (thinning can
    retract or fabricate endpoints, so the best-distance pair is
    occasionally a mid-curve artifact that strands the walk or doubles it
    back). If no pair is clean, the best-scoring one is kept. Views
    without endpoints (closed curves) fall back to the minimum-(v, u)
    start pixel and are flagged closed; the cut alignment is then left to
    the global matching stage.
    """
    F = rig.fundamental
    try:
        pairs = ranked_start_pairs(cl1.endpoints, cl2.endpoints, F)
    except NoEndpoints:
        s1 = traverse(cl1, _closed_curve_start(cl1), params, view_id=1, closed=True)
        s2 = traverse(cl2, _closed_curve_start(cl2), params, view_id=2, closed=True)
        return s1, s2
    best = None
    for pair in pairs[:4]:
        s1 = traverse(cl1, pair.endpoint_1, params, view_id=1)
        s2 = traverse(cl2, pair.endpoint_2, params, view_id=2)
        score = _order_score(s1, cl1) + _order_score(s2, cl2)
        if score < ACCEPTABLE_ORDER_SCORE:
            return s1, s2
        if best is None or score < best[0]:
            best = (score, (s1, s2))
    return best[1]


def match_sequences(
    S1: OrderedSequence, S2: OrderedSequence, rig: StereoRig, config: PipelineConfig
):
    """Cost matrix, optimal monotone path, and refined correspondences."""
    D = cost_matrix(
        S1,
        S2,
        rig.fundamental,
        degenerate_penalty=config.degenerate_penalty,
        symmetric=config.symmetric_distance,
    )
    path = dp_align(D)
    corr = refine(path, S1, S2, D, refine_vertical=config.vertical_refine)
    return D, path, corr


def reconstruct_from_sequences(
    S1: OrderedSequence, S2: OrderedSequence, rig: StereoRig, config: PipelineConfig | None = None
) -> tuple[Curve3D, CorrespondenceSet]:
    config = config or PipelineConfig()
    _, _, corr = match_sequences(S1, S2, rig, config)
    return reconstruct(corr, rig), corr


def reconstruct_from_masks(
    mask1: np.ndarray, mask2: np.ndarray, rig: StereoRig, config: PipelineConfig | None = None
) -> dict:
    """Full pipeline on two binary masks; returns all stage artifacts."""
    config = config or PipelineConfig()
    stages = _Stages()
    skel1 = stages.run("skeletonize_view1", skeletonize, mask1)
    skel2 = stages.run("skeletonize_view2", skeletonize, mask2)
    cl1 = stages.run("extract_view1", extract_centerline, skel1)
    cl2 = stages.run("extract_view2", extract_centerline, skel2)
    params = config.traversal_params
    s1, s2 = stages.run("order", order_centerlines, cl1, cl2, rig, params)
    D, path, corr = stages.run("match", match_sequences, s1, s2, rig, config)
    curve = stages.run("triangulate", reconstruct, corr, rig)
    return {
        "skeletons": (skel1, skel2),
        "centerlines": (cl1, cl2),
        "sequences": (s1, s2),
        "cost_matrix": D,
        "path": path,
        "correspondences": corr,
        "curve": curve,
        "timings": stages.timings,
    }


def reconstruct_scene(scene_dir, config: PipelineConfig | None = None, out_dir=None) -> dict:
    """Run the configured pipeline on a scene directory.

    In "masks" mode the full chain runs (thin, extract, order, match,
    triangulate); in "ordered_points" mode the ground-truth ordered CSVs
    are taken as-is and only the matching stages run. When out_dir is
    given every stage artifact is written there.
    """
    config = config or PipelineConfig()
    scene = Path(scene_dir)
    stages = _Stages()
    calib = scene / "calib.json"
    if not calib.exists():
        raise StageFailure("load_calibration", FileNotFoundError(f"{calib} does not exist"))
    rig = stages.run("load_calibration", sio.read_calibration, calib)

    artifacts: dict = {"rig": rig, "timings": stages.timings}
    if config.input_mode == "ordered_points":
        # Accept the synth layout or a previous run's stage artifacts (resume).
        def ordered_path(view: int) -> Path:
            primary = scene / f"gt_order_view{view}.csv"
            return primary if primary.exists() else scene / f"ordered_view{view}.csv"

        s1 = stages.run("load_ordered_view1", sio.read_ordered_csv, ordered_path(1), 1)
        s2 = stages.run("load_ordered_view2", sio.read_ordered_csv, ordered_path(2), 2)
        artifacts["sequences"] = (s1, s2)
        D, path, corr = stages.run("match", match_sequences, s1, s2, rig, config)
        curve = stages.run("triangulate", reconstruct, corr, rig)
        artifacts.update({"cost_matrix": D, "path": path, "correspondences": corr, "curve": curve})
    else:
        mask1 = stages.run("load_mask_view1", load_mask, scene / "view1.pgm")
        mask2 = stages.run("load_mask_view2", load_mask, scene / "view2.pgm")
        result = reconstruct_from_masks(mask1, mask2, rig, config)
        stages.timings.update(result.pop("timings"))
        artifacts.update(result)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        s1, s2 = artifacts["sequences"]
        sio.write_ordered_csv(s1, out / "ordered_view1.csv")
        sio.write_ordered_csv(s2, out / "ordered_view2.csv")
        sio.write_correspondences_csv(artifacts["correspondences"], out / "correspondences.csv")
        sio.write_curve_csv(artifacts["curve"], out / "curve3d.csv")
        sio.write_curve_ply(artifacts["curve"], out / "curve3d.ply")
        if "skeletons" in artifacts:
            save_mask(out / "skeleton_view1.pgm", artifacts["skeletons"][0])
            save_mask(out / "skeleton_view2.pgm", artifacts["skeletons"][1])
            sio.write_centerline_csv(artifacts["centerlines"][0], out / "centerline_view1.csv")
            sio.write_centerline_csv(artifacts["centerlines"][1], out / "centerline_view2.csv")
        (out / "timings.json").write_text(
            json.dumps({k: round(v, 6) for k, v in stages.timings.items()}, indent=2, sort_keys=True)
            + "\n"
        )
    return artifacts


# --- benchmark loop -----------------------------------------------------------

BENCH_MODES = ("ordered_points", "gt_mask", "end_to_end")


def _mask_from_pixels(seq: OrderedSequence, image_size) -> np.ndarray:
    h, w = image_size
    mask = np.zeros((h, w), dtype=bool)
    pts = np.rint(np.asarray(seq.points, dtype=float)).astype(int)
    mask[pts[:, 1], pts[:, 0]] = True
    return mask


def bench_scene(
    seed: int,
    preset: str = "orthogonal",
    config: PipelineConfig | None = None,
    stroke_px: int = 2,
    spec: CurveSpec | None = None,
) -> dict[str, ReconMetrics]:
    """One seed, three input modes, metrics against the exact ground truth.

    Modes: "ordered_points" feeds the ground-truth ordered pixels straight
    to the matcher; "gt_mask" uses the 1-px ground-truth centerline as the
    mask (no thinning error); "end_to_end" runs the full chain from the
    thick rendered masks.
    """
    config = config or PipelineConfig()
    bundle = make_scene(seed, preset, stroke_px, spec)
    gt = bundle.curve
    results: dict[str, ReconMetrics] = {}

    curve, _ = reconstruct_from_sequences(
        bundle.ordered_pixels[0], bundle.ordered_pixels[1], bundle.rig, config
    )
    results["ordered_points"] = evaluate(curve, gt, config.gt_resample_factor * len(curve))

    gt_masks = tuple(_mask_from_pixels(s, bundle.rig.image_size) for s in bundle.ordered_pixels)
    curve = reconstruct_from_masks(gt_masks[0], gt_masks[1], bundle.rig, config)["curve"]
    results["gt_mask"] = evaluate(curve, gt, config.gt_resample_factor * len(curve))

    curve = reconstruct_from_masks(bundle.masks[0], bundle.masks[1], bundle.rig, config)["curve"]
    results["end_to_end"] = evaluate(curve, gt, config.gt_resample_factor * len(curve))
    return results


def make_scene(
    seed: int,
    preset: str = "orthogonal",
    stroke_px: int = 2,
    spec: CurveSpec | None = None,
    jitter_seed: int | None = None,
) -> SceneBundle:
    """Deterministic scene for a seed: curve, rig, rendered views."""
    spec = spec if spec is not None else CurveSpec(seed=seed)
    if spec.seed != seed:
        spec = replace(spec, seed=seed)
    bundle = render_views(gen_curve(spec), make_rig(preset, jitter_seed), stroke_px=stroke_px)
    bundle.spec = spec
    return bundle
