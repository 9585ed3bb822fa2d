"""Two-view camera geometry from the ground up.

Builds the default biplanar rig, projects a handful of 3D points into
both views, verifies the epipolar constraint, and triangulates the
pixels back into space. Everything downstream of this demo rests on
these three operations.
"""

import numpy as np

from slender3d.camera import (
    fundamental_matrix,
    point_to_epiline_distance,
    project,
    triangulate,
)
from slender3d.synth import make_rig

rig = make_rig("orthogonal")
F = fundamental_matrix(rig)

print("Rig: two 1000 px cameras, 512x512 images, 500 mm from the origin")
print("camera 1 center:", np.round(rig.cam1.pose.center, 1), "mm")
print("camera 2 center:", np.round(rig.cam2.pose.center, 1), "mm")
print("\nFundamental matrix (maps view-2 pixels to view-1 lines):")
print(np.array2string(F, precision=5, suppress_small=True))

# Project a few world points into both views.
rng = np.random.default_rng(0)
points = rng.uniform(-60, 60, size=(5, 3))
print("\n point (mm)              view 1 (px)        view 2 (px)   epi dist (px)")
for X in points:
    p1 = project(rig.cam1.intrinsics, rig.cam1.pose, X)
    p2 = project(rig.cam2.intrinsics, rig.cam2.pose, X)
    d = point_to_epiline_distance(F, p1, p2)
    print(
        f" {np.round(X, 1)!s:22s}  ({p1[0]:6.1f},{p1[1]:6.1f})  "
        f"({p2[0]:6.1f},{p2[1]:6.1f})   {d:.2e}"
    )

# Corresponding pixels land on each other's epipolar lines (distance ~ 0),
# and the two rays intersect exactly at the original point.
X = np.array([20.0, -15.0, 30.0])
p1 = project(rig.cam1.intrinsics, rig.cam1.pose, X)
p2 = project(rig.cam2.intrinsics, rig.cam2.pose, X)
recovered = triangulate(rig, p1, p2)
print("\ntriangulation round trip:")
print("  original :", X)
print("  recovered:", np.round(recovered, 9))
print("  error    :", np.linalg.norm(recovered - X), "mm")

# Pixel noise maps to millimeter-scale 3D noise at this geometry.
noisy = triangulate(rig, (p1[0] + 0.5, p1[1]), p2)
print("\nhalf-pixel disturbance in view 1 moves the point by", end=" ")
print(f"{np.linalg.norm(noisy - X):.3f} mm")
