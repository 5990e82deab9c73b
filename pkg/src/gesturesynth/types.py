"""Shared data types: bounding boxes, hand masks, layout maps.

Coordinate convention throughout the toolkit: x runs rightward (columns),
y runs downward (rows), origin at the top-left pixel. A mask is indexed
``mask[y, x]``. Bounding boxes are inclusive on both ends.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import EmptyMask

Point = Tuple[int, int]  # (x, y)


@dataclass(frozen=True)
class BoundingBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate box {self.as_tuple()}")

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def contains(self, point) -> bool:
        x, y = point
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1


def mask_bounding_box(mask: np.ndarray) -> BoundingBox:
    """Tight inclusive box over the set pixels of a binary mask."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("cannot take the bounding box of an empty mask")
    return BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


@dataclass
class HandMask:
    """A binary hand mask with its fingertip point and derived bounding box.

    Invariants: the fingertip is a set pixel of ``mask`` and ``bbox`` is the
    tight box of the set pixels. Use :meth:`from_mask` to construct with the
    box derived automatically.
    """

    mask: np.ndarray  # H x W bool
    fingertip: Point  # (x, y)
    bbox: BoundingBox

    @classmethod
    def from_mask(cls, mask: np.ndarray, fingertip: Point) -> "HandMask":
        return cls(mask=mask.astype(bool), fingertip=(int(fingertip[0]), int(fingertip[1])),
                   bbox=mask_bounding_box(mask))

    def validate(self) -> None:
        x, y = self.fingertip
        h, w = self.mask.shape
        if not (0 <= x < w and 0 <= y < h) or not self.mask[y, x]:
            raise ValueError(f"fingertip {self.fingertip} is not a set pixel of the mask")
        if self.bbox != mask_bounding_box(self.mask):
            raise ValueError("bbox is not the tight box of the mask")

    @property
    def area(self) -> int:
        return int(self.mask.sum())


@dataclass
class LayoutMap:
    """Conditioning input for the scene composer: hand layout in a target domain."""

    mask: np.ndarray  # H x W bool
    fingertip: Point
    domain_label: str

    @classmethod
    def from_hand_mask(cls, hand: HandMask, domain_label: str) -> "LayoutMap":
        return cls(mask=hand.mask, fingertip=hand.fingertip, domain_label=domain_label)
