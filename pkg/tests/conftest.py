"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest
from scipy.spatial import cKDTree

from slender3d.camera import Camera, Intrinsics, Pose, StereoRig
from slender3d.curves import Curve3D, polyline_lengths
from slender3d.matching import CostMatrix
from slender3d.synth import make_rig


@pytest.fixture(scope="session")
def ortho_rig() -> StereoRig:
    return make_rig("orthogonal")


@pytest.fixture(scope="session")
def all_rigs() -> dict[str, StereoRig]:
    return {name: make_rig(name) for name in ("orthogonal", "carm_30deg", "near_degenerate")}


def identity_rig(baseline=(1.0, 0.0, 0.0)) -> StereoRig:
    """K = I cameras; camera 2 offset by the baseline, both looking +z."""
    intr = Intrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0)
    cam1 = Camera(intrinsics=intr, pose=Pose(rotation=np.eye(3), translation=np.zeros(3)))
    cam2 = Camera(
        intrinsics=intr, pose=Pose(rotation=np.eye(3), translation=-np.asarray(baseline, float))
    )
    return StereoRig(cam1=cam1, cam2=cam2, image_size=(64, 64))


def random_world_points(rng, n, spread_mm=80.0) -> np.ndarray:
    """Points scattered around the world origin, visible in the rig presets."""
    return rng.uniform(-spread_mm, spread_mm, size=(n, 3))


def brute_force_min_path_cost(D: np.ndarray) -> float:
    """Exhaustive minimum over all monotone paths, summing in path order."""
    n1, n2 = D.shape
    best = [None]

    def rec(i, j, acc):
        acc = acc + D[i, j]
        if i == n1 - 1 and j == n2 - 1:
            if best[0] is None or acc < best[0]:
                best[0] = acc
            return
        if i + 1 < n1:
            rec(i + 1, j, acc)
        if j + 1 < n2:
            rec(i, j + 1, acc)
        if i + 1 < n1 and j + 1 < n2:
            rec(i + 1, j + 1, acc)

    rec(0, 0, 0.0)
    return best[0]


def cost_matrix_of(values: np.ndarray) -> CostMatrix:
    values = np.asarray(values, dtype=float)
    return CostMatrix(values=values, degenerate_mask=np.zeros_like(values, dtype=bool))


def brute_force_chamfer(recon: np.ndarray, gt: np.ndarray):
    """All-pairs nearest-neighbor metrics, no spatial indexing."""
    d_rg = np.sqrt(((recon[:, None, :] - gt[None, :, :]) ** 2).sum(-1)).min(axis=1)
    d_gr = np.sqrt(((gt[:, None, :] - recon[None, :, :]) ** 2).sum(-1)).min(axis=1)
    acc = float(np.mean(d_rg))
    comp = float(np.mean(d_gr))
    return acc, comp, 0.5 * (acc + comp), float(max(d_rg.max(), d_gr.max()))


def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def tangency_curve(n=1200) -> Curve3D:
    """Curve whose middle ~15% lies in the y = 0 epipolar plane.

    Both preset cameras have centers at y = 0, so the baseline lies in
    that plane and any curve stretch inside it runs along corresponding
    epipolar lines in both views (the degenerate-intersection scenario).
    """
    t = np.linspace(0.0, 1.0, n)
    y = np.where(
        t < 0.45,
        -40.0 * (1.0 - smoothstep(t / 0.45)),
        np.where(t <= 0.60, 0.0, 40.0 * smoothstep((t - 0.60) / 0.40)),
    )
    x = -55.0 + 110.0 * t
    z = 25.0 * np.sin(np.pi * t) - 10.0
    pts = np.column_stack([x, y, z])
    return Curve3D(points=pts, arclength=polyline_lengths(pts))


def epiline_tangency_fraction(F: np.ndarray, p1: np.ndarray, p2: np.ndarray, deg=5.0) -> float:
    """Share of the view-1 polyline running within `deg` of the epilines."""
    tang = np.diff(p1, axis=0)
    tang = tang / np.linalg.norm(tang, axis=1, keepdims=True)
    lines = np.column_stack([p2[:-1], np.ones(len(p2) - 1)]) @ F.T
    ldir = np.column_stack([-lines[:, 1], lines[:, 0]])
    norms = np.linalg.norm(ldir, axis=1)
    ok = norms > 1e-12
    cosang = np.abs(np.sum(tang[ok] * (ldir[ok] / norms[ok, None]), axis=1))
    angles = np.degrees(np.arccos(np.clip(cosang, 0.0, 1.0)))
    return float(np.mean(angles < deg))


def continuity_ranks(points: np.ndarray, gt_points: np.ndarray, radius=2.0) -> np.ndarray:
    """Map recovered pixels to ground-truth arc ranks.

    Where several ground-truth samples sit within the snap radius (the
    projection crosses or grazes itself there, so the pixel genuinely
    represents more than one arc position), the rank closest to the
    previous point's rank is chosen; plain nearest-snap would flip between
    branches and penalize a correct traversal.
    """
    tree = cKDTree(gt_points)
    dist, nearest = tree.query(points)
    ranks = np.empty(len(points), dtype=int)
    prev = None
    for t in range(len(points)):
        if prev is None:
            ranks[t] = int(nearest[t])
        else:
            cands = tree.query_ball_point(points[t], max(radius, dist[t] + 0.25))
            ranks[t] = min(cands, key=lambda c: (abs(c - prev), c))
        prev = ranks[t]
    return ranks
