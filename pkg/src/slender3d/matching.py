"""Globally optimal order-preserving cross-view correspondence.

Two ordered pixel sequences are aligned by dynamic programming over the
matrix of point-to-epipolar-line distances. The optimal monotone path may
contain horizontal or vertical runs (one-to-many matches caused by
occlusion, discretization, or segmentation noise); those are converted to
unique continuous correspondences by distance-weighted interpolation, and
the resulting pairs are triangulated into a 3D curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .camera import StereoRig, epiline_distance_matrix, reprojection_residuals, triangulate_many
from .curves import Curve3D
from .errors import AllPairsDegenerate, EmptySequence, NoIntersections
from .ordering import OrderedSequence

ZERO_WEIGHT_TOL = 1e-15


@dataclass
class CostMatrix:
    """Pairwise epipolar distances between two ordered sequences.

    values[i, j] is the distance from view-1 point i to the epipolar line
    of view-2 point j, except where degenerate_mask is set: those cells
    received the configured penalty because the line was undefined.
    """

    values: np.ndarray
    degenerate_mask: np.ndarray

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass
class MonotonePath:
    """Minimum-cost monotone traversal of a cost matrix.

    steps is an (L, 2) array of 0-based (i, j) index pairs from (0, 0) to
    (rows - 1, cols - 1); each step increments i and/or j by one.
    """

    steps: np.ndarray
    total_cost: float


@dataclass
class CorrespondenceSet:
    """One-to-one matches: one refined view-1 point per view-2 index.

    view1_points carries continuous coordinates (interpolated inside
    one-to-many path runs); row_param is the matching continuous view-1
    sequence coordinate, and anchor_rows the two view-1 indices bracketing
    each match (equal for exact lattice matches).
    """

    view1_points: np.ndarray  # (M, 2) float
    view2_points: np.ndarray  # (M, 2) float
    costs: np.ndarray  # (M,) source-cell distance
    row_param: np.ndarray  # (M,) float
    anchor_rows: np.ndarray  # (M, 2) int

    def __len__(self) -> int:
        return len(self.view2_points)

    @property
    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.view1_points[k], self.view2_points[k]) for k in range(len(self))]


def cost_matrix(
    S1: OrderedSequence,
    S2: OrderedSequence,
    F: np.ndarray,
    degenerate_penalty: float | None = None,
    symmetric: bool = False,
) -> CostMatrix:
    """Element-wise point-to-epipolar-line distances for two sequences.

    Cells whose epipolar line is degenerate get degenerate_penalty
    (default: twice the finite maximum of the matrix) and are flagged.
    """
    if len(S1) == 0 or len(S2) == 0:
        raise EmptySequence("both ordered sequences must be non-empty")
    dist, degenerate = epiline_distance_matrix(F, S1.points, S2.points, symmetric=symmetric)
    if degenerate.any():
        if degenerate_penalty is None:
            finite = dist[~degenerate]
            degenerate_penalty = 2.0 * float(finite.max()) if finite.size else 1.0
        dist = np.where(degenerate, degenerate_penalty, dist)
    return CostMatrix(values=dist, degenerate_mask=degenerate)


@njit(cache=True)
def _dp_fill(D: np.ndarray) -> np.ndarray:
    n1, n2 = D.shape
    C = np.empty((n1, n2))
    C[0, 0] = D[0, 0]
    for j in range(1, n2):
        C[0, j] = C[0, j - 1] + D[0, j]
    for i in range(1, n1):
        C[i, 0] = C[i - 1, 0] + D[i, 0]
        for j in range(1, n2):
            best = C[i - 1, j - 1]
            if C[i - 1, j] < best:
                best = C[i - 1, j]
            if C[i, j - 1] < best:
                best = C[i, j - 1]
            C[i, j] = D[i, j] + best
    return C


def dp_align(D: CostMatrix) -> MonotonePath:
    """Minimum-cost monotone path through the accumulated cost matrix.

    Fills C[i, j] = D[i, j] + min(C[i-1, j], C[i, j-1], C[i-1, j-1]) with
    cumulative-sum boundaries, then backtracks from the far corner
    preferring diagonal, then vertical, then horizontal predecessors on
    ties. total_cost is the minimum over all monotone paths.
    """
    values = np.ascontiguousarray(D.values, dtype=np.float64)
    if values.size == 0:
        raise EmptySequence("cost matrix is empty")
    C = _dp_fill(values)
    i, j = values.shape[0] - 1, values.shape[1] - 1
    rev = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, vert, horz = C[i - 1, j - 1], C[i - 1, j], C[i, j - 1]
            best = min(diag, vert, horz)
            if diag == best:
                i -= 1
                j -= 1
            elif vert == best:
                i -= 1
            else:
                j -= 1
        rev.append((i, j))
    steps = np.array(rev[::-1], dtype=np.int64)
    return MonotonePath(steps=steps, total_cost=float(C[-1, -1]))


def _interp(p_a: np.ndarray, w_a: float, p_b: np.ndarray, w_b: float):
    """Distance-weighted blend: weight w_a on p_a, w_b on p_b.

    Falls back to the midpoint when both weights vanish (the operator's
    zero-weight-sum case is resolved, not raised).
    """
    total = w_a + w_b
    if w_a < ZERO_WEIGHT_TOL and w_b < ZERO_WEIGHT_TOL:
        return 0.5 * (p_a + p_b), 0.5
    frac_b = w_b / total
    return (w_a * p_a + w_b * p_b) / total, frac_b


def refine(
    path: MonotonePath,
    S1: OrderedSequence,
    S2: OrderedSequence,
    D: CostMatrix,
    refine_vertical: bool = False,
) -> CorrespondenceSet:
    """Convert a monotone path into unique per-view-2-index correspondences.

    Diagonal steps map directly. Each maximal horizontal run at row i* is
    replaced by interpolation anchored at the run's minimum-cost column j*:
    columns left of j* blend s[i*-1] with s[i*], the j* column keeps s[i*]
    exactly, and columns right of j* blend s[i*] with s[i*+1], each with
    weights taken from the adjacent-row costs (a boundary row clamps the
    missing neighbor to s[i*]). Vertical runs (many view-1 rows to one
    view-2 column) are collapsed to their minimum-cost row, so every
    view-2 index appears exactly once.

    With refine_vertical=True, vertical runs instead emit one pair per row
    with the view-2 point interpolated symmetrically; the output then has
    one pair per path cell on those runs and is no longer exactly one per
    view-2 index.
    """
    steps = path.steps
    vals = D.values
    n1, n2 = vals.shape
    P1 = np.asarray(S1.points, dtype=float)
    P2 = np.asarray(S2.points, dtype=float)

    # Maximal same-row (horizontal) runs, as step-index ranges.
    runs: list[tuple[int, int, int]] = []  # (row, first step idx, last step idx)
    k = 0
    L = len(steps)
    while k < L:
        m = k
        while m + 1 < L and steps[m + 1, 0] == steps[k, 0]:
            m += 1
        if m > k:
            runs.append((int(steps[k, 0]), k, m))
        k = m + 1

    col_rows: dict[int, list[int]] = {}
    for i, j in steps:
        col_rows.setdefault(int(j), []).append(int(i))

    horizontal_value: dict[int, tuple[np.ndarray, float, float, tuple[int, int]]] = {}
    for i_star, k0, k1 in runs:
        j_lo, j_hi = int(steps[k0, 1]), int(steps[k1, 1])
        j_star = j_lo + int(np.argmin(vals[i_star, j_lo : j_hi + 1]))  # first min on ties
        for j in range(j_lo, j_hi + 1):
            if len(col_rows[j]) > 1:
                continue  # corner column also on a vertical run: collapse wins
            if j == j_star or (j < j_star and i_star == 0) or (j > j_star and i_star == n1 - 1):
                horizontal_value[j] = (P1[i_star], float(i_star), vals[i_star, j], (i_star, i_star))
            elif j < j_star:
                point, frac = _interp(
                    P1[i_star - 1], vals[i_star, j], P1[i_star], vals[i_star - 1, j]
                )
                horizontal_value[j] = (
                    point,
                    (i_star - 1) + frac,
                    vals[i_star, j],
                    (i_star - 1, i_star),
                )
            else:
                point, frac = _interp(
                    P1[i_star], vals[i_star + 1, j], P1[i_star + 1], vals[i_star, j]
                )
                horizontal_value[j] = (point, i_star + frac, vals[i_star, j], (i_star, i_star + 1))

    out_v1, out_v2, out_cost, out_param, out_anchor = [], [], [], [], []

    def emit(point1, point2, cost, param, anchors):
        out_v1.append(point1)
        out_v2.append(point2)
        out_cost.append(cost)
        out_param.append(param)
        out_anchor.append(anchors)

    for j in range(n2):
        rows = col_rows[j]
        if len(rows) > 1 and refine_vertical:
            # Symmetric operator: interpolate view-2 between columns j-1/j+1.
            costs_col = vals[rows, j]
            i_anchor = rows[int(np.argmin(costs_col))]
            for i in rows:
                if i == i_anchor or (i < i_anchor and j == 0) or (i > i_anchor and j == n2 - 1):
                    emit(P1[i], P2[j], vals[i, j], float(i), (i, i))
                elif i < i_anchor:
                    point, _ = _interp(P2[j - 1], vals[i, j], P2[j], vals[i, j - 1])
                    emit(P1[i], point, vals[i, j], float(i), (i, i))
                else:
                    point, _ = _interp(P2[j], vals[i, j + 1], P2[j + 1], vals[i, j])
                    emit(P1[i], point, vals[i, j], float(i), (i, i))
        elif len(rows) > 1:
            costs_col = vals[rows, j]
            i_keep = rows[int(np.argmin(costs_col))]  # smallest row on ties
            emit(P1[i_keep], P2[j], vals[i_keep, j], float(i_keep), (i_keep, i_keep))
        elif j in horizontal_value:
            point, param, cost, anchors = horizontal_value[j]
            emit(point, P2[j], cost, param, anchors)
        else:
            i = rows[0]
            emit(P1[i], P2[j], vals[i, j], float(i), (i, i))

    return CorrespondenceSet(
        view1_points=np.array(out_v1, dtype=float),
        view2_points=np.array(out_v2, dtype=float),
        costs=np.array(out_cost, dtype=float),
        row_param=np.array(out_param, dtype=float),
        anchor_rows=np.array(out_anchor, dtype=np.int64),
    )


def _triangulate_filtered(rig: StereoRig, M1: np.ndarray, M2: np.ndarray) -> Curve3D:
    """Batch-triangulate, dropping unstable or behind-camera results."""
    X, ok = triangulate_many(rig, M1, M2)
    z1 = rig.cam1.pose.transform(X)[:, 2]
    z2 = rig.cam2.pose.transform(X)[:, 2]
    ok &= (z1 > 0) & (z2 > 0)
    if not ok.any():
        raise AllPairsDegenerate("no correspondence pair triangulated stably")
    pts = X[ok]
    r1, r2 = reprojection_residuals(rig, pts, M1[ok], M2[ok])
    return Curve3D(
        points=pts, residuals_view1=r1, residuals_view2=r2, n_dropped=int(np.count_nonzero(~ok))
    )


def reconstruct(corr: CorrespondenceSet, rig: StereoRig) -> Curve3D:
    """Triangulate every correspondence pair, dropping unstable ones.

    Raises AllPairsDegenerate when nothing triangulates; otherwise returns
    the ordered 3D points with per-point reprojection residuals and the
    count of dropped pairs.
    """
    if len(corr) == 0:
        raise AllPairsDegenerate("correspondence set is empty")
    return _triangulate_filtered(rig, corr.view1_points, corr.view2_points)


def naive_intersection_baseline(
    S1: OrderedSequence, S2: OrderedSequence, F: np.ndarray, rig: StereoRig
) -> Curve3D:
    """Local epipolar-intersection matcher (robustness comparison stand-in).

    For each view-2 point, its epipolar line is intersected with the
    view-1 polyline and the intersection nearest the previous match is
    kept; points whose line misses the polyline are skipped. No global
    ordering constraint is enforced, which is exactly what makes it
    fragile near self-crossings and tangencies.
    """
    if len(S1) == 0 or len(S2) == 0:
        raise EmptySequence("both ordered sequences must be non-empty")
    P1 = np.asarray(S1.points, dtype=float)
    P2 = np.asarray(S2.points, dtype=float)
    seg_a, seg_b = P1[:-1], P1[1:]
    matches1, matches2 = [], []
    prev = P1[0]
    for j in range(len(P2)):
        line = F @ np.array([P2[j, 0], P2[j, 1], 1.0])
        f = P1 @ line[:2] + line[2]
        fa, fb = f[:-1], f[1:]
        crossing = (fa * fb <= 0) & ((fa != 0) | (fb != 0))
        idx = np.nonzero(crossing)[0]
        if idx.size == 0:
            continue
        t = fa[idx] / (fa[idx] - fb[idx])
        pts = seg_a[idx] + t[:, None] * (seg_b[idx] - seg_a[idx])
        nearest = int(np.argmin(np.linalg.norm(pts - prev, axis=1)))
        prev = pts[nearest]
        matches1.append(prev)
        matches2.append(P2[j])
    if not matches1:
        raise NoIntersections("every epipolar line missed the view-1 polyline")
    return _triangulate_filtered(rig, np.array(matches1), np.array(matches2))
