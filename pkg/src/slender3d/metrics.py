"""Chamfer-style evaluation of a reconstructed curve against ground truth.

Directed conventions: accuracy is the mean distance from reconstruction
points to their nearest ground-truth point, completeness the reverse,
overall their arithmetic mean, and max error the largest distance in
either direction. Ground truth is densely resampled by arc length before
matching so discretization does not inflate the nearest-neighbor gaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .curves import Curve3D, resample_polyline
from .errors import EmptyCurve


@dataclass(frozen=True)
class ReconMetrics:
    accuracy: float  # mm, reconstruction -> ground truth
    completeness: float  # mm, ground truth -> reconstruction
    overall: float  # mm, mean of the two
    max_error: float  # mm, worst nearest-neighbor gap either way
    n_recon: int
    n_gt: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "completeness": self.completeness,
            "overall": self.overall,
            "max_error": self.max_error,
            "n_recon": self.n_recon,
            "n_gt": self.n_gt,
            "units": "mm",
        }


def evaluate(recon: Curve3D, gt: Curve3D, gt_resample: int | None = None) -> ReconMetrics:
    """Four-way Chamfer comparison of two curves.

    gt_resample controls the ground-truth densification: None picks
    10x the reconstruction size (the default bias bound), any value <= 0
    disables resampling, and a positive value is used as-is. n_gt reports
    the point count the metrics were actually computed over.
    """
    rec = np.asarray(recon.points, dtype=float)
    gtp = np.asarray(gt.points, dtype=float)
    if rec.size == 0 or gtp.size == 0:
        raise EmptyCurve("both curves must contain points")
    if gt_resample is None:
        gt_resample = 10 * len(rec)
    if gt_resample > 0 and len(gtp) > 1:
        gtp = resample_polyline(gtp, gt_resample)
    d_rec_to_gt, _ = cKDTree(gtp).query(rec)
    d_gt_to_rec, _ = cKDTree(rec).query(gtp)
    accuracy = float(np.mean(d_rec_to_gt))
    completeness = float(np.mean(d_gt_to_rec))
    return ReconMetrics(
        accuracy=accuracy,
        completeness=completeness,
        overall=0.5 * (accuracy + completeness),
        max_error=float(max(d_rec_to_gt.max(), d_gt_to_rec.max())),
        n_recon=len(rec),
        n_gt=len(gtp),
    )
