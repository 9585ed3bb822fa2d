"""Pinhole camera pair: projection, epipolar geometry, and triangulation.

Conventions used throughout:

* Pixel points are ``(u, v)`` with ``u`` along image width and ``v`` along
  image height; homogeneous pixels are ``(u, v, 1)``.
* A :class:`Pose` maps world coordinates into camera coordinates,
  ``x_cam = R @ X_world + t`` (world units are millimeters).
* The fundamental matrix maps a view-2 pixel to its epipolar line in view 1:
  ``line_1 = F @ (u2, v2, 1)`` and ``n1^T F n2 = 0`` for corresponding pixels.
  The relative pose inside F takes view-2 camera coordinates into view-1
  camera coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BehindCamera,
    DegenerateBaseline,
    DegenerateEpipolarLine,
    TriangulationUnstable,
)

# ~1000x double epsilon at the problem's pixel/mm scale.
EPIPOLAR_TOL_PX = 1e-6
MIN_BASELINE_MM = 1e-9
MIN_DEPTH_MM = 1e-9
RANK_RATIO_TOL = 1e-10
TRIANGULATION_COND_TOL = 1e-12
# a^2 + b^2 below this means the "line" F @ n2 has no direction.
DEGENERATE_LINE_TOL = 1e-18


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels, assembling to an upper-triangular K."""

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, self.skew, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class Pose:
    """World-to-camera rigid transform: ``x_cam = rotation @ X + translation``."""

    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,), mm

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if np.max(np.abs(R @ R.T - np.eye(3))) > 1e-9 or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation is not orthonormal with determinant +1")

    @property
    def matrix(self) -> np.ndarray:
        """The 3x4 matrix [R | t]."""
        return np.hstack([self.rotation, self.translation[:, None]])

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates, -R^T t."""
        return -self.rotation.T @ self.translation

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Map world points (..., 3) into camera coordinates."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class Camera:
    """One calibrated view: intrinsics plus its world-frame pose."""

    intrinsics: Intrinsics
    pose: Pose

    @property
    def projection_matrix(self) -> np.ndarray:
        """The 3x4 matrix K [R | t]."""
        return self.intrinsics.matrix @ self.pose.matrix


@dataclass(frozen=True)
class StereoRig:
    """Two calibrated views sharing one image size (H, W)."""

    cam1: Camera
    cam2: Camera
    image_size: tuple[int, int]
    _fundamental: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        R, t = relative_pose(self.cam1.pose, self.cam2.pose)
        if np.linalg.norm(t) < MIN_BASELINE_MM:
            raise DegenerateBaseline(
                f"relative translation norm {np.linalg.norm(t):.3e} mm is below "
                f"{MIN_BASELINE_MM} mm"
            )
        F = _fundamental_from_relative(
            self.cam1.intrinsics.matrix, self.cam2.intrinsics.matrix, R, t
        )
        s = np.linalg.svd(F, compute_uv=False)
        if s[2] / s[0] >= RANK_RATIO_TOL:
            raise ValueError(f"derived fundamental matrix is not rank 2 (ratio {s[2] / s[0]:.3e})")
        object.__setattr__(self, "_fundamental", F)

    @property
    def fundamental(self) -> np.ndarray:
        return self._fundamental


def relative_pose(pose1: Pose, pose2: Pose) -> tuple[np.ndarray, np.ndarray]:
    """Rigid transform taking view-2 camera coordinates into view-1.

    Returns (R, t) with ``x_cam1 = R @ x_cam2 + t``.
    """
    R = pose1.rotation @ pose2.rotation.T
    t = pose1.translation - R @ pose2.translation
    return R, t


def skew_matrix(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix [v]x with [v]x @ w == cross(v, w)."""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _fundamental_from_relative(K1, K2, R, t) -> np.ndarray:
    return np.linalg.inv(K1).T @ skew_matrix(t) @ R @ np.linalg.inv(K2)


def fundamental_matrix(rig: StereoRig) -> np.ndarray:
    """Rank-2 matrix F with n1^T F n2 = 0 for corresponding pixels.

    Raises DegenerateBaseline when the camera centers coincide (this is
    checked at rig construction, and re-checked here for rigs built from
    already-validated cameras whose poses were since recomposed).
    """
    _, t = relative_pose(rig.cam1.pose, rig.cam2.pose)
    if np.linalg.norm(t) < MIN_BASELINE_MM:
        raise DegenerateBaseline("zero baseline between views")
    return rig.fundamental


def epipolar_line(F: np.ndarray, p2) -> np.ndarray:
    """Line (a, b, c) in view 1 for view-2 pixel p2; not normalized."""
    u, v = float(p2[0]), float(p2[1])
    return F @ np.array([u, v, 1.0])


def point_to_epiline_distance(F: np.ndarray, p1, p2, symmetric: bool = False) -> float:
    """Distance in pixels from p1 (view 1) to the epipolar line of p2.

    The default normalizes only by the view-1 line, matching the cost used
    by the correspondence stage. With ``symmetric=True`` the average of
    both directed distances is returned instead.

    Raises DegenerateEpipolarLine when p2 coincides with the epipole (the
    line has no direction to measure against).
    """
    n1 = np.array([float(p1[0]), float(p1[1]), 1.0])
    line = epipolar_line(F, p2)
    norm_sq = line[0] ** 2 + line[1] ** 2
    if norm_sq < DEGENERATE_LINE_TOL:
        raise DegenerateEpipolarLine(f"view-2 point {tuple(p2)} lies on the epipole")
    d12 = abs(float(n1 @ line)) / np.sqrt(norm_sq)
    if not symmetric:
        return d12
    line21 = F.T @ n1
    norm_sq_21 = line21[0] ** 2 + line21[1] ** 2
    if norm_sq_21 < DEGENERATE_LINE_TOL:
        raise DegenerateEpipolarLine(f"view-1 point {tuple(p1)} lies on the epipole")
    n2 = np.array([float(p2[0]), float(p2[1]), 1.0])
    d21 = abs(float(n2 @ line21)) / np.sqrt(norm_sq_21)
    return 0.5 * (d12 + d21)


def epiline_distance_matrix(
    F: np.ndarray, pts1: np.ndarray, pts2: np.ndarray, symmetric: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs point-to-epipolar-line distances.

    Args:
        F: fundamental matrix mapping view-2 pixels to view-1 lines.
        pts1: (N, 2) view-1 pixels.
        pts2: (M, 2) view-2 pixels.
        symmetric: average both directed distances instead of the
            view-1-only form.

    Returns:
        (dist, degenerate): dist is (N, M) with NaN where the distance is
        undefined; degenerate is an (N, M) bool mask of those cells. In the
        asymmetric form degeneracy depends only on the view-2 point, so the
        mask is constant along each column.
    """
    h1 = np.hstack([np.asarray(pts1, dtype=float), np.ones((len(pts1), 1))])  # (N, 3)
    h2 = np.hstack([np.asarray(pts2, dtype=float), np.ones((len(pts2), 1))])  # (M, 3)
    lines = h2 @ F.T  # (M, 3): row j is F @ n2_j
    numer = np.abs(h1 @ lines.T)  # (N, M)
    denom_sq = lines[:, 0] ** 2 + lines[:, 1] ** 2  # (M,)
    bad_cols = denom_sq < DEGENERATE_LINE_TOL
    denom = np.sqrt(np.where(bad_cols, 1.0, denom_sq))
    dist = numer / denom[None, :]
    degenerate = np.broadcast_to(bad_cols[None, :], dist.shape).copy()
    if symmetric:
        lines21 = h1 @ F  # (N, 3): row i is F^T @ n1_i
        denom_sq_21 = lines21[:, 0] ** 2 + lines21[:, 1] ** 2  # (N,)
        bad_rows = denom_sq_21 < DEGENERATE_LINE_TOL
        denom21 = np.sqrt(np.where(bad_rows, 1.0, denom_sq_21))
        dist = 0.5 * (dist + numer / denom21[:, None])
        degenerate |= np.broadcast_to(bad_rows[:, None], dist.shape)
    dist[degenerate] = np.nan
    return dist, degenerate


def project(intrinsics: Intrinsics, world_pose: Pose, X) -> tuple[float, float]:
    """Project one world point; raises BehindCamera for depth <= 1e-9 mm."""
    x_cam = world_pose.transform(np.asarray(X, dtype=float).reshape(3))
    z = x_cam[2]
    if z <= MIN_DEPTH_MM:
        raise BehindCamera(f"point has camera depth {z:.3e} mm")
    u = (intrinsics.fx * x_cam[0] + intrinsics.skew * x_cam[1]) / z + intrinsics.cx
    v = intrinsics.fy * x_cam[1] / z + intrinsics.cy
    return float(u), float(v)


def project_many(camera: Camera, points: np.ndarray) -> np.ndarray:
    """Project (N, 3) world points to (N, 2) pixels; all must be in front."""
    x_cam = camera.pose.transform(np.asarray(points, dtype=float))
    z = x_cam[:, 2]
    bad = np.nonzero(z <= MIN_DEPTH_MM)[0]
    if bad.size:
        raise BehindCamera(f"point index {bad[0]} has camera depth {z[bad[0]]:.3e} mm")
    K = camera.intrinsics
    u = (K.fx * x_cam[:, 0] + K.skew * x_cam[:, 1]) / z + K.cx
    v = K.fy * x_cam[:, 1] / z + K.cy
    return np.column_stack([u, v])


def _dlt_systems(rig: StereoRig, P1: np.ndarray, P2: np.ndarray) -> np.ndarray:
    """Stacked (N, 4, 4) homogeneous systems, one per correspondence."""
    M1 = rig.cam1.projection_matrix
    M2 = rig.cam2.projection_matrix
    n = len(P1)
    A = np.empty((n, 4, 4))
    A[:, 0] = P1[:, 0, None] * M1[2] - M1[0]
    A[:, 1] = P1[:, 1, None] * M1[2] - M1[1]
    A[:, 2] = P2[:, 0, None] * M2[2] - M2[0]
    A[:, 3] = P2[:, 1, None] * M2[2] - M2[1]
    return A


def triangulate(rig: StereoRig, p1, p2) -> np.ndarray:
    """World point minimizing the algebraic two-view reprojection error (DLT).

    Raises TriangulationUnstable when the system does not pin down a unique
    null direction (rays nearly parallel / identical camera centers):
    the second-smallest singular value ratio falls below 1e-12.
    """
    P1 = np.asarray(p1, dtype=float).reshape(1, 2)
    P2 = np.asarray(p2, dtype=float).reshape(1, 2)
    A = _dlt_systems(rig, P1, P2)[0]
    _, s, Vt = np.linalg.svd(A)
    if s[2] / s[0] < TRIANGULATION_COND_TOL:
        raise TriangulationUnstable(
            f"singular value ratio {s[2] / s[0]:.3e} indicates near-parallel rays"
        )
    X = Vt[-1]
    if abs(X[3]) < 1e-15:
        raise TriangulationUnstable("triangulated point is at infinity")
    return X[:3] / X[3]


def triangulate_many(
    rig: StereoRig, P1: np.ndarray, P2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Batched DLT over (N, 2) pixel arrays.

    Returns (points, ok): points is (N, 3) with rows undefined where ok is
    False; ok flags pairs that triangulated stably. Never raises per pair.
    """
    P1 = np.asarray(P1, dtype=float).reshape(-1, 2)
    P2 = np.asarray(P2, dtype=float).reshape(-1, 2)
    A = _dlt_systems(rig, P1, P2)
    _, s, Vt = np.linalg.svd(A)
    X = Vt[:, -1, :]  # (N, 4) null directions
    ok = (s[:, 2] / s[:, 0] >= TRIANGULATION_COND_TOL) & (np.abs(X[:, 3]) >= 1e-15)
    w = np.where(ok, X[:, 3], 1.0)
    return X[:, :3] / w[:, None], ok


def reprojection_residuals(rig: StereoRig, X: np.ndarray, P1: np.ndarray, P2: np.ndarray):
    """Pixel distances between projections of X and the matched pixels."""
    q1 = project_many(rig.cam1, X)
    q2 = project_many(rig.cam2, X)
    r1 = np.linalg.norm(q1 - np.asarray(P1, dtype=float), axis=1)
    r2 = np.linalg.norm(q2 - np.asarray(P2, dtype=float), axis=1)
    return r1, r2
