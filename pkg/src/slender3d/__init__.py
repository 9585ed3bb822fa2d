"""Two-view 3D centerline reconstruction for slender deformable bodies.

The library turns a pair of calibrated binary masks of a thin curved
structure into an ordered 3D curve: masks are thinned to 1-px centerlines,
each view's pixels are put into topological order by a geometry-guided
traversal, the two orders are aligned globally under epipolar costs by
dynamic programming, and the refined one-to-one matches are triangulated.
A seed-driven synthetic scene generator provides exact ground truth for
verification, evaluated with Chamfer-style accuracy/completeness metrics.
"""

from .camera import (
    Camera,
    Intrinsics,
    Pose,
    StereoRig,
    epipolar_line,
    fundamental_matrix,
    point_to_epiline_distance,
    project,
    triangulate,
)
from .centerline import Centerline, extract_centerline, load_mask, save_mask, skeletonize
from .curves import Curve3D
from .matching import (
    CorrespondenceSet,
    CostMatrix,
    MonotonePath,
    cost_matrix,
    dp_align,
    naive_intersection_baseline,
    reconstruct,
    refine,
)
from .metrics import ReconMetrics, evaluate
from .ordering import (
    OrderedSequence,
    StartPair,
    TraversalParams,
    angle_penalty,
    candidate_set,
    select_start_pair,
    step_loss,
    traverse,
    window_curvature,
)
from .pipeline import (
    PipelineConfig,
    bench_scene,
    make_scene,
    reconstruct_from_masks,
    reconstruct_from_sequences,
    reconstruct_scene,
)
from .synth import CurveSpec, SceneBundle, gen_curve, inject_occlusion, make_rig, render_views

__version__ = "0.1.0"
