"""Ordered 3D curves and polyline helpers shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Curve3D:
    """Ordered 3D points in world millimeters.

    Serves both as reconstruction output (with per-point reprojection
    residuals in pixels) and as synthetic ground truth (with arc-length
    parameters).
    """

    points: np.ndarray  # (N, 3)
    residuals_view1: np.ndarray | None = None  # (N,) px
    residuals_view2: np.ndarray | None = None  # (N,) px
    arclength: np.ndarray | None = None  # (N,) mm from the first point
    n_dropped: int = 0  # correspondences lost to unstable triangulation

    def __len__(self) -> int:
        return len(self.points)


def polyline_lengths(points: np.ndarray) -> np.ndarray:
    """Cumulative chord length along a polyline, starting at 0."""
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def resample_polyline(points: np.ndarray, n: int) -> np.ndarray:
    """Resample a polyline to n points uniformly spaced in arc length."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 1:
        return np.repeat(pts, n, axis=0)
    s = polyline_lengths(pts)
    total = s[-1]
    if total == 0.0:
        return np.repeat(pts[:1], n, axis=0)
    targets = np.linspace(0.0, total, n)
    return np.column_stack([np.interp(targets, s, pts[:, k]) for k in range(pts.shape[1])])


def count_self_intersections(points2d: np.ndarray) -> int:
    """Number of transversal crossings between non-adjacent polyline segments.

    Vectorized all-pairs orientation test; adjacent segments (sharing an
    endpoint) are excluded. Intended for crossing statistics on projected
    curves, not exact computational geometry (collinear overlaps count 0).
    """
    pts = np.asarray(points2d, dtype=float)
    n = len(pts) - 1
    if n < 3:
        return 0
    a = pts[:-1]
    b = pts[1:]
    i, j = np.triu_indices(n, k=2)
    p, r = a[i], b[i] - a[i]
    q, s = a[j], b[j] - a[j]

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    rxs = cross(r, s)
    qp = q - p
    nonparallel = np.abs(rxs) > 1e-12
    t = np.where(nonparallel, cross(qp, s) / np.where(nonparallel, rxs, 1.0), np.nan)
    u = np.where(nonparallel, cross(qp, r) / np.where(nonparallel, rxs, 1.0), np.nan)
    hits = nonparallel & (t > 0) & (t < 1) & (u > 0) & (u < 1)
    return int(np.count_nonzero(hits))
