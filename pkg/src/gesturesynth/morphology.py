"""Binary mask morphology: erosion, blob filtering, fingertip and box extraction."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .exceptions import EmptyMask
from .types import BoundingBox, Point, mask_bounding_box
from .validation import check_binary_mask

# 8-connectivity for all component labeling in this toolkit
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary erosion with a square structuring element of side 2*radius + 1.

    Out-of-bounds neighborhood counts as unset, so set pixels within `radius`
    of the border are always cleared.
    """
    mask = check_binary_mask(mask)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0 or not mask.any():
        return mask.copy()
    out = mask.copy()
    # a square erosion separates into two 1-D min filters
    for axis in (0, 1):
        acc = out.copy()
        for d in range(1, radius + 1):
            acc &= _shift(out, d, axis) & _shift(out, -d, axis)
        out = acc
    return out


def _shift(mask: np.ndarray, d: int, axis: int) -> np.ndarray:
    """Shift a mask by d pixels along axis, filling the vacated edge with False."""
    out = np.zeros_like(mask)
    src = [slice(None), slice(None)]
    dst = [slice(None), slice(None)]
    if d > 0:
        src[axis], dst[axis] = slice(d, None), slice(None, -d)
    else:
        src[axis], dst[axis] = slice(None, d), slice(-d, None)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def label_components(mask: np.ndarray):
    """8-connected component labeling. Returns (labels, n_components)."""
    mask = check_binary_mask(mask)
    labels, n = ndimage.label(mask, structure=_STRUCTURE_8)
    return labels, int(n)


def remove_small_blobs(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Clear 8-connected components with area strictly below min_area."""
    mask = check_binary_mask(mask)
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    if min_area == 0 or not mask.any():
        return mask.copy()
    labels, n = label_components(mask)
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    keep = areas >= min_area
    keep[0] = False
    return keep[labels]


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 8-connected component (ties: lowest label wins)."""
    mask = check_binary_mask(mask)
    labels, n = label_components(mask)
    if n == 0:
        raise EmptyMask("mask has no components")
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    areas[0] = 0
    return labels == int(areas.argmax())


def locate_fingertip(mask: np.ndarray) -> Point:
    """Topmost set pixel, ties broken toward smaller x.

    Egocentric pointing convention: the hand enters from the frame bottom, so
    the fingertip is the highest point of the silhouette.
    """
    mask = check_binary_mask(mask)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("cannot locate a fingertip on an empty mask")
    y = int(ys.min())
    x = int(xs[ys == y].min())
    return (x, y)


def bounding_box(mask: np.ndarray) -> BoundingBox:
    """Tight inclusive bounding box over set pixels."""
    return mask_bounding_box(check_binary_mask(mask))
