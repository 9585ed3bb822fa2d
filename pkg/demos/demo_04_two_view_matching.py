"""Global correspondence by dynamic programming, then 3D reconstruction.

The two ordered sequences are aligned with a monotone minimum-cost path
through the matrix of point-to-epipolar-line distances. One-to-many path
runs are refined into unique sub-pixel matches, each pair is
triangulated, and the result is scored against the exact ground truth.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from slender3d.matching import cost_matrix, dp_align, refine, reconstruct
from slender3d.metrics import evaluate
from slender3d.pipeline import PipelineConfig, make_scene, reconstruct_from_masks

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

bundle = make_scene(7, "orthogonal")

# Ground-truth ordered projections straight into the matcher: this is the
# "ordered points provided" evaluation mode.
S1, S2 = bundle.ordered_pixels
D = cost_matrix(S1, S2, bundle.rig.fundamental)
path = dp_align(D)
corr = refine(path, S1, S2, D)
curve = reconstruct(corr, bundle.rig)
m = evaluate(curve, bundle.curve, 10 * len(curve))
print(f"cost matrix {D.rows}x{D.cols}, optimal path cost {path.total_cost:.2f}")
print(f"refined correspondences: {len(corr)} (one per view-2 point)")
print(
    f"ordered-points reconstruction: overall {m.overall:.4f} mm, "
    f"max {m.max_error:.4f} mm over {m.n_recon} points"
)

# The full pipeline from the raw masks runs the same matcher after
# skeletonization and traversal; segmentation becomes the bottleneck.
res = reconstruct_from_masks(bundle.masks[0], bundle.masks[1], bundle.rig, PipelineConfig())
m2 = evaluate(res["curve"], bundle.curve, 10 * len(res["curve"]))
print(f"end-to-end from masks:         overall {m2.overall:.4f} mm, max {m2.max_error:.4f} mm")

fig = plt.figure(figsize=(12, 4.5))
ax = fig.add_subplot(1, 3, 1)
sub = slice(0, None, 2)
ax.imshow(np.minimum(D.values[sub, sub], 30), cmap="magma")
ax.plot(path.steps[:, 1] / 2, path.steps[:, 0] / 2, "c-", lw=0.8)
ax.set_title("cost matrix + optimal monotone path")
ax.set_xlabel("view-2 index")
ax.set_ylabel("view-1 index")

ax = fig.add_subplot(1, 3, 2, projection="3d")
gt = bundle.curve.points
ax.plot(gt[:, 0], gt[:, 1], gt[:, 2], "k-", lw=2.5, alpha=0.3, label="ground truth")
ax.plot(curve.points[:, 0], curve.points[:, 1], curve.points[:, 2], "r-", lw=1, label="ordered")
ax.legend()
ax.set_title("reconstruction vs ground truth")

ax = fig.add_subplot(1, 3, 3)
ax.plot(curve.residuals_view1, label="view 1")
ax.plot(curve.residuals_view2, label="view 2")
ax.set_title("per-point reprojection residuals (px)")
ax.set_xlabel("correspondence index")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "demo_04_matching.png", dpi=110)
print("wrote", out_dir / "demo_04_matching.png")
