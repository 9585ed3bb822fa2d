"""Mask IO, thinning, and centerline extraction."""

import numpy as np
import pytest
from scipy import ndimage

from slender3d.centerline import extract_centerline, load_mask, save_mask, skeletonize
from slender3d.errors import EmptySkeleton, IoError, UnsupportedFormat


def has_full_2x2_block(img):
    return bool((img[:-1, :-1] & img[:-1, 1:] & img[1:, :-1] & img[1:, 1:]).any())


def component_count(img):
    _, n = ndimage.label(img, structure=np.ones((3, 3), dtype=int))
    return n


class TestMaskIo:
    def test_all_black_png(self, tmp_path):
        path = tmp_path / "black.png"
        save_mask(path, np.zeros((64, 64), dtype=bool))
        assert not load_mask(path).any()

    @pytest.mark.parametrize("suffix", [".pgm", ".png"])
    def test_round_trip_bit_exact(self, tmp_path, suffix):
        rng = np.random.default_rng(2)
        mask = rng.uniform(size=(40, 55)) > 0.7
        path = tmp_path / f"m{suffix}"
        save_mask(path, mask)
        assert np.array_equal(load_mask(path), mask)

    def test_truncated_file_raises_io_error(self, tmp_path):
        path = tmp_path / "broken.pgm"
        save_mask(path, np.ones((32, 32), dtype=bool))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(IoError, match="broken.pgm"):
            load_mask(path)

    def test_unsupported_suffix(self, tmp_path):
        path = tmp_path / "mask.tiff"
        path.write_bytes(b"not an image")
        with pytest.raises(UnsupportedFormat, match="mask.tiff"):
            load_mask(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises((IoError, FileNotFoundError)):
            load_mask(tmp_path / "nope.png")


class TestSkeletonize:
    def test_thick_bar_thins_to_long_line(self):
        mask = np.zeros((20, 60), dtype=bool)
        mask[8:11, 5:55] = True  # 3 px thick, 50 long
        skel = skeletonize(mask)
        assert not has_full_2x2_block(skel)
        # parallel two-subiteration thinning erodes 1-2 px per bar end;
        # 47 is the measured fixed point for this exact fixture
        assert skel.sum() >= 47
        assert (skel & ~mask).sum() == 0
        # one pixel wide: every row slice of the bar has at most 1 pixel
        assert skel[:, 20:40].sum(axis=0).max() == 1

    def test_single_pixel_preserved(self):
        mask = np.zeros((9, 9), dtype=bool)
        mask[4, 4] = True
        assert np.array_equal(skeletonize(mask), mask)

    def test_thick_sine_stays_near_analytic_curve(self):
        h, w = 80, 200
        mask = np.zeros((h, w), dtype=bool)
        xs = np.arange(10, 190)
        ys = np.round(40 + 18 * np.sin(xs / 18.0)).astype(int)
        for x, y in zip(xs, ys):
            mask[y - 2 : y + 3, x - 2 : x + 3] = True
        skel = skeletonize(mask)
        curve = np.column_stack([xs, ys])
        for v, u in np.argwhere(skel):
            assert np.min(np.hypot(curve[:, 0] - u, curve[:, 1] - v)) <= 2.0

    def test_idempotent(self):
        rng = np.random.default_rng(8)
        mask = np.zeros((64, 64), dtype=bool)
        xs = np.arange(5, 60)
        ys = np.round(30 + 12 * np.sin(xs / 7.0) + rng.uniform(-1, 1, len(xs))).astype(int)
        for x, y in zip(xs, ys):
            mask[y - 1 : y + 2, x - 1 : x + 2] = True
        once = skeletonize(mask)
        assert np.array_equal(skeletonize(once), once)

    def test_never_creates_foreground(self):
        rng = np.random.default_rng(9)
        mask = ndimage.binary_dilation(rng.uniform(size=(48, 48)) > 0.92, iterations=2)
        assert not (skeletonize(mask) & ~mask).any()

    def test_preserves_component_count(self):
        rng = np.random.default_rng(10)
        mask = ndimage.binary_dilation(rng.uniform(size=(60, 60)) > 0.95, iterations=2)
        assert component_count(skeletonize(mask)) == component_count(mask)

    def test_empty_mask(self):
        assert not skeletonize(np.zeros((16, 16), dtype=bool)).any()


class TestExtractCenterline:
    def test_horizontal_line(self):
        mask = np.zeros((8, 16), dtype=bool)
        mask[4, 3:13] = True
        cl = extract_centerline(mask)
        assert len(cl) == 10
        assert sorted(map(tuple, cl.endpoints.tolist())) == [(3, 4), (12, 4)]
        interior = cl.degrees[(cl.points[:, 0] > 3) & (cl.points[:, 0] < 12)]
        assert (interior == 2).all()

    def test_l_shaped_path(self):
        # Hand-enumerated 8-neighborhoods: corner has its two arms as
        # neighbors, arm pixels adjacent to the corner see each other too.
        mask = np.zeros((10, 10), dtype=bool)
        mask[2, 2:7] = True  # horizontal arm, corner at (6, 2)
        mask[2:7, 6] = True  # vertical arm down from the corner
        cl = extract_centerline(mask)
        assert len(cl.endpoints) == 2
        assert sorted(map(tuple, cl.endpoints.tolist())) == [(2, 2), (6, 6)]
        corner = cl.degrees[cl.point_index[(6, 2)]]
        assert corner == 2

    def test_empty_raises(self):
        with pytest.raises(EmptySkeleton):
            extract_centerline(np.zeros((8, 8), dtype=bool))

    def test_small_specks_dropped_but_fragments_kept(self):
        mask = np.zeros((40, 120), dtype=bool)
        mask[20, 5:50] = True  # 45 px piece
        mask[20, 60:90] = True  # 30 px piece (plausible occlusion split)
        mask[5, 5] = True  # 1 px noise speck
        cl = extract_centerline(mask)
        assert cl.dropped_pixels == 1
        assert len(cl) == 75
        assert len(cl.endpoints) == 4
