"""Calibrated biplanar ground-truth scenes for pipeline verification.

Random smooth 3D curves are generated from a seed, projected into a
two-view rig, and rasterized into binary masks, together with the exact
ground-truth ordered projections of each view. Everything is a pure
function of the seeds, so scenes are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .camera import Camera, Intrinsics, Pose, StereoRig, project_many
from .curves import Curve3D, polyline_lengths, resample_polyline
from .errors import GapTooLarge, InvalidSpec, OutOfFrame, UnknownPreset
from .ordering import OrderedSequence

RIG_PRESETS = {"orthogonal": 90.0, "carm_30deg": 30.0, "near_degenerate": 5.0}

DEFAULT_FOCAL_PX = 1000.0
DEFAULT_IMAGE_SIZE = (512, 512)  # (H, W)
DEFAULT_STANDOFF_MM = 500.0


@dataclass(frozen=True)
class CurveSpec:
    """Parameters of one random curve; seed alone fixes the result."""

    seed: int
    n_control: int = 8
    length_mm: float = 200.0
    bend_scale: float = 25.0
    loop_bias: float = 0.6
    n_samples: int = 1200

    def __post_init__(self):
        if self.n_control < 4:
            raise InvalidSpec(f"n_control must be >= 4, got {self.n_control}")
        if self.n_samples < 100:
            raise InvalidSpec(f"n_samples must be >= 100, got {self.n_samples}")
        if not self.length_mm > 0:
            raise InvalidSpec(f"length_mm must be positive, got {self.length_mm}")
        if not 0.0 <= self.loop_bias <= 1.0:
            raise InvalidSpec(f"loop_bias must be in [0, 1], got {self.loop_bias}")
        if self.bend_scale < 0:
            raise InvalidSpec(f"bend_scale must be >= 0, got {self.bend_scale}")


@dataclass
class SceneBundle:
    """One rendered scene: ground truth, rig, masks, and ordered pixels."""

    curve: Curve3D
    rig: StereoRig
    masks: tuple[np.ndarray, np.ndarray]
    ordered_pixels: tuple[OrderedSequence, OrderedSequence]
    stroke_px: int = 2
    spec: CurveSpec | None = None


def catmull_rom(control: np.ndarray, samples_per_seg: int = 24) -> np.ndarray:
    """C1 interpolating spline through the control points (uniform knots)."""
    ctrl = np.asarray(control, dtype=float)
    padded = np.vstack([2 * ctrl[0] - ctrl[1], ctrl, 2 * ctrl[-1] - ctrl[-2]])
    out = [ctrl[0]]
    for k in range(1, len(padded) - 2):
        p0, p1, p2, p3 = padded[k - 1], padded[k], padded[k + 1], padded[k + 2]
        t = np.linspace(0.0, 1.0, samples_per_seg + 1)[1:, None]
        out.append(
            0.5
            * (
                2 * p1
                + (p2 - p0) * t
                + (2 * p0 - 5 * p1 + 4 * p2 - p3) * t**2
                + (-p0 + 3 * p1 - 3 * p2 + p3) * t**3
            )
        )
    return np.vstack(out)


def gen_curve(spec: CurveSpec) -> Curve3D:
    """Random smooth space curve, resampled to uniform arc-length spacing.

    Control points sit on a straight diagonal chord and are displaced by
    bend_scale-amplitude offsets: an incoherent smooth component plus a
    loop_bias-weighted corkscrew whose turns make the projections
    self-cross. bend_scale = 0 therefore yields an exact straight segment.
    The result is rescaled so total arc length equals length_mm.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_control
    axis = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    t = np.linspace(-0.5, 0.5, n)[:, None]
    base = t * spec.length_mm * axis

    # Orthonormal frame transverse to the chord, for the corkscrew.
    e1 = np.cross(axis, [0.0, 0.0, 1.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    turns = 2.0 + 0.5 * rng.uniform()
    phase = rng.uniform(0.0, 2.0 * np.pi)
    angles = 2.0 * np.pi * turns * np.linspace(0.0, 1.0, n) + phase
    swirl = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    noise = rng.normal(size=(n, 3))
    # Swirl dominates so crossings stay transversal; too much incoherent
    # noise curls the chord back on itself and fuses the rendered strokes.
    control = base + spec.bend_scale * (spec.loop_bias * swirl + 0.3 * noise)

    dense = catmull_rom(control, samples_per_seg=max(8, 4 * spec.n_samples // n))
    pts = resample_polyline(dense, spec.n_samples)
    length = polyline_lengths(pts)[-1]
    if length > 0:
        center = pts.mean(axis=0)
        pts = center + (pts - center) * (spec.length_mm / length)
    s = polyline_lengths(pts)
    return Curve3D(points=pts, arclength=s)


def _look_at(center: np.ndarray, target: np.ndarray, up=(0.0, 1.0, 0.0)) -> Pose:
    """World-to-camera pose for a camera at center looking at target."""
    z = np.asarray(target, dtype=float) - center
    z /= np.linalg.norm(z)
    x = np.cross(up, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    R = np.vstack([x, y, z])
    return Pose(rotation=R, translation=-R @ center)


def _rotation_about(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    ux, uy, uz = axis
    K = np.array([[0, -uz, uy], [uz, 0, -ux], [-uy, ux, 0]])
    return np.eye(3) + np.sin(angle_rad) * K + (1 - np.cos(angle_rad)) * (K @ K)


def make_rig(preset: str, jitter_seed: int | None = None) -> StereoRig:
    """Two-view rig preset: ~90, ~30, or ~5 degree view separation.

    Both cameras use a 1000 px focal length, 512x512 images, and sit
    500 mm from the world origin where generated curves are centered.
    jitter_seed adds small pose errors (rotations up to 0.2 degrees,
    translations up to 1 mm) emulating calibration uncertainty.
    """
    if preset not in RIG_PRESETS:
        raise UnknownPreset(f"unknown rig preset {preset!r}; choose from {sorted(RIG_PRESETS)}")
    sep = np.deg2rad(RIG_PRESETS[preset])
    h, w = DEFAULT_IMAGE_SIZE
    intr = Intrinsics(fx=DEFAULT_FOCAL_PX, fy=DEFAULT_FOCAL_PX, cx=w / 2.0, cy=h / 2.0)
    origin = np.zeros(3)
    c1 = np.array([0.0, 0.0, -DEFAULT_STANDOFF_MM])
    c2 = np.array([-DEFAULT_STANDOFF_MM * np.sin(sep), 0.0, -DEFAULT_STANDOFF_MM * np.cos(sep)])
    poses = [_look_at(c1, origin), _look_at(c2, origin)]
    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        jittered = []
        for pose in poses:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = np.deg2rad(rng.uniform(0.0, 0.2))
            dt = rng.uniform(-1.0, 1.0, size=3)
            jittered.append(
                Pose(rotation=_rotation_about(axis, angle) @ pose.rotation,
                     translation=pose.translation + dt)
            )
        poses = jittered
    return StereoRig(
        cam1=Camera(intrinsics=intr, pose=poses[0]),
        cam2=Camera(intrinsics=intr, pose=poses[1]),
        image_size=(h, w),
    )


def _walk_pixels(proj: np.ndarray, step: float = 0.4) -> np.ndarray:
    """Supersample a projected polyline so consecutive samples are <= step px."""
    seg = np.linalg.norm(np.diff(proj, axis=0), axis=1)
    pieces = [proj[:1]]
    for k, d in enumerate(seg):
        n = max(1, int(np.ceil(d / step)))
        t = np.linspace(0.0, 1.0, n + 1)[1:, None]
        pieces.append(proj[k] + t * (proj[k + 1] - proj[k]))
    return np.vstack(pieces)


def _disk_offsets(radius: int) -> np.ndarray:
    r = int(radius)
    du, dv = np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1))
    keep = du**2 + dv**2 <= r**2
    return np.column_stack([du[keep], dv[keep]])


def _stamp(mask: np.ndarray, centers: np.ndarray, offsets: np.ndarray) -> None:
    h, w = mask.shape
    all_px = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    u = np.clip(all_px[:, 0], 0, w - 1)
    v = np.clip(all_px[:, 1], 0, h - 1)
    mask[v, u] = True


def render_views(curve: Curve3D, rig: StereoRig, stroke_px: int = 2) -> SceneBundle:
    """Rasterize both projections with a disk brush of radius stroke_px.

    Raises OutOfFrame (with the first offending sample index) when any
    curve point projects outside an image. stroke_px = 0 produces the bare
    1-px polyline. The returned ground-truth ordered points are the exact
    (continuous) projections of the curve samples, index-aligned across
    the two views, so they follow the 3D arc length and stay duplicate-free
    even where the projection crosses or grazes itself.
    """
    h, w = rig.image_size
    masks = []
    ordered = []
    for view_id, cam in ((1, rig.cam1), (2, rig.cam2)):
        proj = project_many(cam, curve.points)
        inside = (proj[:, 0] >= 0) & (proj[:, 0] <= w - 1) & (proj[:, 1] >= 0) & (proj[:, 1] <= h - 1)
        if not inside.all():
            raise OutOfFrame(
                f"curve sample {int(np.argmin(inside))} projects outside view {view_id}"
            )
        walk = _walk_pixels(proj)
        centers = np.rint(walk).astype(np.int64)
        mask = np.zeros((h, w), dtype=bool)
        _stamp(mask, centers, _disk_offsets(stroke_px))
        masks.append(mask)
        ordered.append(OrderedSequence(view_id=view_id, points=proj))
        # Construction invariant: no stray foreground away from the polyline.
        fg = np.argwhere(mask)[:, ::-1]  # (u, v)
        d, _ = cKDTree(walk).query(fg)
        assert d.max() <= stroke_px + 0.75, "rasterized pixel strayed from the polyline"
    return SceneBundle(
        curve=curve,
        rig=rig,
        masks=(masks[0], masks[1]),
        ordered_pixels=(ordered[0], ordered[1]),
        stroke_px=stroke_px,
    )


def inject_occlusion(
    bundle: SceneBundle, view: int, gap_start_frac: float, gap_len_px: int
) -> SceneBundle:
    """Erase a gap_len_px-long stretch of one view's mask (plus brush width).

    The window starts at gap_start_frac of the view's projected arc length
    and extends for gap_len_px pixels of arc. Ground truth is left
    untouched: only the mask loses pixels, emulating an occluder across
    the projection. Raises GapTooLarge when the gap would remove 30% or
    more of the view's projected length.
    """
    if view not in (1, 2):
        raise ValueError("view must be 1 or 2")
    if gap_len_px == 0:
        return bundle
    seq = np.asarray(bundle.ordered_pixels[view - 1].points, dtype=float)
    arc = polyline_lengths(seq)
    if gap_len_px >= 0.3 * arc[-1]:
        raise GapTooLarge(
            f"gap of {gap_len_px} px would remove >= 30% of the {arc[-1]:.0f} px projection"
        )
    s0 = gap_start_frac * (arc[-1] - gap_len_px)
    s0 = min(max(s0, 0.0), arc[-1] - gap_len_px)
    in_window = (arc >= s0) & (arc <= s0 + gap_len_px)
    window = np.rint(seq[in_window]).astype(np.int64)
    mask = bundle.masks[view - 1].copy()
    h, w = mask.shape
    offsets = _disk_offsets(bundle.stroke_px + 1)
    all_px = (window[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    u = np.clip(all_px[:, 0], 0, w - 1)
    v = np.clip(all_px[:, 1], 0, h - 1)
    mask[v, u] = False
    masks = (mask, bundle.masks[1]) if view == 1 else (bundle.masks[0], mask)
    return replace(bundle, masks=masks)
