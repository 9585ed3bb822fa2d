"""Binary-mask ingestion and one-pixel-wide centerline extraction.

Masks are plain ``(H, W)`` boolean numpy arrays indexed ``mask[v, u]``.
Centerline points are integer ``(u, v)`` pixel coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import EmptySkeleton, IoError, UnsupportedFormat

_RASTER_SUFFIXES = {".pgm", ".png"}

# Offsets of the 8-neighborhood, fixed scan order (row-major).
NEIGHBOR_OFFSETS = np.array(
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
)  # (du, dv)


@dataclass
class Centerline:
    """Unordered skeleton pixels with 8-connectivity degrees.

    Attributes:
        points: (N, 2) integer (u, v) pixels, raster order.
        degrees: (N,) count of 8-neighbors present in the point set.
        endpoints: (E, 2) the degree-1 points.
        dropped_pixels: foreground pixels discarded because they belonged
            to a smaller connected component.
    """

    points: np.ndarray
    degrees: np.ndarray
    endpoints: np.ndarray
    dropped_pixels: int = 0

    @cached_property
    def point_index(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.points)}

    @cached_property
    def kdtree(self) -> cKDTree:
        return cKDTree(self.points)

    def __len__(self) -> int:
        return len(self.points)


def load_mask(path) -> np.ndarray:
    """Read a PGM (P5) or 8-bit grayscale PNG as a boolean mask (>127 is on)."""
    path = Path(path)
    if path.suffix.lower() not in _RASTER_SUFFIXES:
        raise UnsupportedFormat(f"{path}: expected one of {sorted(_RASTER_SUFFIXES)}")
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: not a decodable raster image") from exc
    except (OSError, ValueError) as exc:
        # Pillow reports truncated pixel buffers as ValueError.
        raise IoError(f"{path}: {exc}") from exc
    return arr > 127


def save_mask(path, mask: np.ndarray) -> None:
    """Write a boolean mask as PGM or PNG (foreground 255, background 0)."""
    path = Path(path)
    if path.suffix.lower() not in _RASTER_SUFFIXES:
        raise UnsupportedFormat(f"{path}: expected one of {sorted(_RASTER_SUFFIXES)}")
    img = Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8), "L")
    try:
        img.save(path)
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc


def _neighbor_stack(padded: np.ndarray) -> list[np.ndarray]:
    """P2..P9 of the Zhang-Suen neighborhood, clockwise from north."""
    return [
        padded[:-2, 1:-1],  # N
        padded[:-2, 2:],  # NE
        padded[1:-1, 2:],  # E
        padded[2:, 2:],  # SE
        padded[2:, 1:-1],  # S
        padded[2:, :-2],  # SW
        padded[1:-1, :-2],  # W
        padded[:-2, :-2],  # NW
    ]


def _thinning_pass(img: np.ndarray, second: bool) -> np.ndarray:
    padded = np.pad(img, 1).astype(np.uint8)
    p = _neighbor_stack(padded)
    b = sum(pi.astype(np.int8) for pi in p)
    ring = p + [p[0]]
    a = sum(((ring[k] == 0) & (ring[k + 1] == 1)) for k in range(8))
    if not second:
        cond_c = (p[0] * p[2] * p[4] == 0) & (p[2] * p[4] * p[6] == 0)
    else:
        cond_c = (p[0] * p[2] * p[6] == 0) & (p[0] * p[4] * p[6] == 0)
    remove = img & (b >= 2) & (b <= 6) & (a == 1) & cond_c
    return img & ~remove


def _full_blocks(img: np.ndarray) -> np.ndarray:
    """Top-left (v, u) corners of fully-foreground 2x2 blocks."""
    blk = img[:-1, :-1] & img[:-1, 1:] & img[1:, :-1] & img[1:, 1:]
    return np.argwhere(blk)


def _is_simple(img: np.ndarray, v: int, u: int) -> bool:
    """True when deleting (v, u) preserves local 8-connectivity.

    Requires >= 2 foreground neighbors (never erode endpoints), a single
    8-connected component among them, and a 4-adjacent background pixel so
    no hole can be sealed open.
    """
    h, w = img.shape
    nbrs = []
    for dv in (-1, 0, 1):
        for du in (-1, 0, 1):
            if dv == 0 and du == 0:
                continue
            vv, uu = v + dv, u + du
            if 0 <= vv < h and 0 <= uu < w and img[vv, uu]:
                nbrs.append((vv, uu))
    if len(nbrs) < 2:
        return False
    has_bg4 = any(
        not (0 <= v + dv < h and 0 <= u + du < w and img[v + dv, u + du])
        for dv, du in ((-1, 0), (1, 0), (0, -1), (0, 1))
    )
    if not has_bg4:
        return False
    # Count 8-connected components among the neighbors themselves.
    seen = {nbrs[0]}
    stack = [nbrs[0]]
    nbr_set = set(nbrs)
    while stack:
        cv, cu = stack.pop()
        for ov, ou in nbr_set:
            if (ov, ou) not in seen and abs(ov - cv) <= 1 and abs(ou - cu) <= 1:
                seen.add((ov, ou))
                stack.append((ov, ou))
    return len(seen) == len(nbrs)


def _prune_redundant_pixels(img: np.ndarray) -> None:
    """Delete 8-simple pixels until the skeleton is 8-minimal.

    Two-subiteration thinning leaves 4-connected staircases whose elbow
    pixels are redundant (their neighbors already touch each other); a
    path traversal would shortcut past them, stranding unvisited crumbs.
    Deletions are sequential in raster order, each one verified to
    preserve local connectivity, so paths only get tighter, never broken.
    """
    changed = True
    while changed:
        changed = False
        for v, u in np.argwhere(img):
            if _is_simple(img, int(v), int(u)):
                img[v, u] = False
                changed = True


def skeletonize(mask: np.ndarray) -> np.ndarray:
    """Thin a mask to a one-pixel-wide skeleton (two-subiteration thinning).

    The output is a subset of the input foreground, preserves the
    8-connectivity of each component, contains no fully-foreground 2x2
    block, and is 8-minimal (no redundant staircase pixels); an empty
    mask yields an empty skeleton.
    """
    img = np.asarray(mask, dtype=bool).copy()
    while True:
        before = img.sum()
        img = _thinning_pass(img, second=False)
        img = _thinning_pass(img, second=True)
        if img.sum() == before:
            break
    # The classic two-pass thinning can leave 2x2 blocks on staircase
    # diagonals; peel them with topology-preserving single deletions.
    while True:
        blocks = _full_blocks(img)
        if len(blocks) == 0:
            break
        deleted = False
        for bv, bu in blocks:
            bv, bu = int(bv), int(bu)
            if not (img[bv, bu] and img[bv, bu + 1] and img[bv + 1, bu] and img[bv + 1, bu + 1]):
                continue  # broken by an earlier deletion in this pass
            for dv, du in ((0, 0), (0, 1), (1, 0), (1, 1)):
                if _is_simple(img, bv + dv, bu + du):
                    img[bv + dv, bu + du] = False
                    deleted = True
                    break
        if not deleted:
            break
    _prune_redundant_pixels(img)
    return img


def neighbor_degrees(skeleton: np.ndarray) -> np.ndarray:
    """8-neighbor foreground count for every pixel (zero off-skeleton)."""
    counts = ndimage.convolve(
        skeleton.astype(np.uint8), np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]]), mode="constant"
    )
    return np.where(skeleton, counts, 0)


MIN_COMPONENT_PX = 8
MIN_COMPONENT_FRACTION = 0.1


def extract_centerline(skeleton: np.ndarray) -> Centerline:
    """Collect skeleton pixels, their degrees, and the degree-1 endpoints.

    Components much smaller than the largest one (below 10% of its pixel
    count, or under 8 pixels) are treated as segmentation noise and
    dropped, with the discarded pixel count reported in
    ``dropped_pixels``. Substantial fragments are kept: an occlusion can
    split the body's skeleton in two, and the downstream traversal is the
    one equipped to jump that gap.
    """
    skel = np.asarray(skeleton, dtype=bool)
    if not skel.any():
        raise EmptySkeleton("skeleton has no foreground pixels")
    labels, n = ndimage.label(skel, structure=np.ones((3, 3), dtype=int))
    dropped = 0
    if n > 1:
        sizes = ndimage.sum_labels(skel, labels, index=np.arange(1, n + 1))
        # never below the largest component's own size: something must survive
        threshold = min(max(MIN_COMPONENT_PX, MIN_COMPONENT_FRACTION * sizes.max()), sizes.max())
        keep = np.nonzero(sizes >= threshold)[0] + 1
        dropped = int(skel.sum() - sizes[keep - 1].sum())
        skel = np.isin(labels, keep)
    degrees_img = neighbor_degrees(skel)
    vs, us = np.nonzero(skel)
    points = np.column_stack([us, vs]).astype(np.int64)
    degrees = degrees_img[vs, us].astype(np.int64)
    endpoints = points[degrees == 1]
    return Centerline(points=points, degrees=degrees, endpoints=endpoints, dropped_pixels=dropped)
