import numpy as np
import pytest

from gesturesynth.exceptions import EmptyMask
from gesturesynth.morphology import (bounding_box, erode, largest_component,
                                     locate_fingertip, remove_small_blobs)

from oracles import (bounding_box_oracle, erode_oracle, random_blob_mask,
                     remove_small_blobs_oracle)


class TestErode:
    def test_radius_zero_is_identity(self, rng):
        mask = random_blob_mask(rng, 32)
        np.testing.assert_array_equal(erode(mask, 0), mask)

    def test_centered_block_shrinks_to_center(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[1:4, 1:4] = True
        out = erode(mask, 1)
        assert out.sum() == 1
        assert out[2, 2]

    def test_empty_stays_empty(self):
        mask = np.zeros((8, 8), dtype=bool)
        assert not erode(mask, 3).any()

    def test_matches_oracle(self, rng):
        for _ in range(25):
            mask = random_blob_mask(rng, 24)
            radius = int(rng.integers(0, 4))
            np.testing.assert_array_equal(erode(mask, radius),
                                          erode_oracle(mask, radius))

    def test_monotone_subset(self, rng):
        mask = random_blob_mask(rng, 32)
        for radius in (0, 1, 2, 5):
            assert not (erode(mask, radius) & ~mask).any()


class TestRemoveSmallBlobs:
    def test_single_small_component_cleared(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[2, 2:5] = True  # area 3
        assert not remove_small_blobs(mask, 5).any()

    def test_min_area_zero_is_identity(self, rng):
        mask = random_blob_mask(rng, 32)
        np.testing.assert_array_equal(remove_small_blobs(mask, 0), mask)

    def test_keeps_only_large_component(self):
        mask = np.zeros((12, 12), dtype=bool)
        mask[1:3, 1:3] = True    # area 4
        mask[6:9, 6:9] = True    # area 9
        out = remove_small_blobs(mask, 5)
        assert out.sum() == 9
        assert out[7, 7] and not out[1, 1]

    def test_matches_oracle(self, rng):
        for _ in range(25):
            mask = random_blob_mask(rng, 24)
            min_area = int(rng.integers(0, 40))
            np.testing.assert_array_equal(remove_small_blobs(mask, min_area),
                                          remove_small_blobs_oracle(mask, min_area))

    def test_idempotent(self, rng):
        mask = random_blob_mask(rng, 32)
        once = remove_small_blobs(mask, 10)
        np.testing.assert_array_equal(remove_small_blobs(once, 10), once)

    def test_subset_of_input(self, rng):
        mask = random_blob_mask(rng, 32)
        assert not (remove_small_blobs(mask, 12) & ~mask).any()


class TestLocateFingertip:
    def test_vertical_bar(self):
        mask = np.zeros((64, 64), dtype=bool)
        mask[10:51, 32] = True
        assert locate_fingertip(mask) == (32, 10)

    def test_single_pixel(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[9, 7] = True
        assert locate_fingertip(mask) == (7, 9)

    def test_tie_breaks_toward_smaller_x(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[2, 5] = True
        mask[2, 9] = True
        assert locate_fingertip(mask) == (5, 2)

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMask):
            locate_fingertip(np.zeros((4, 4), dtype=bool))


class TestBoundingBox:
    def test_single_pixel(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[4, 3] = True
        assert bounding_box(mask).as_tuple() == (3, 4, 3, 4)

    def test_three_pixels(self):
        mask = np.zeros((10, 10), dtype=bool)
        for x, y in [(1, 1), (5, 2), (3, 7)]:
            mask[y, x] = True
        assert bounding_box(mask).as_tuple() == (1, 1, 5, 7)

    def test_full_mask(self):
        mask = np.ones((6, 9), dtype=bool)
        assert bounding_box(mask).as_tuple() == (0, 0, 8, 5)

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            bounding_box(np.zeros((4, 4), dtype=bool))

    def test_matches_oracle(self, rng):
        for _ in range(25):
            mask = random_blob_mask(rng, 24)
            if not mask.any():
                continue
            assert bounding_box(mask).as_tuple() == bounding_box_oracle(mask)


def test_largest_component_keeps_max_area():
    mask = np.zeros((12, 12), dtype=bool)
    mask[0:2, 0:2] = True
    mask[5:10, 5:10] = True
    out = largest_component(mask)
    assert out.sum() == 25
    assert out[7, 7] and not out[0, 0]
