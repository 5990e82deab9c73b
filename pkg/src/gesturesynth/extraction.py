"""Hand mask extraction: skin thresholding plus foreground refinement.

Pipeline: HSV skin threshold seeds a trimap, the min-cut refinement cleans it
up against the full-color image, the result is intersected with the skin mask,
eroded, blob-filtered, and reduced to the largest component. The fingertip is
the topmost pixel of the surviving blob.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import grabcut, morphology
from .color import rgb_to_hsv
from .exceptions import NoHandFound
from .types import HandMask
from .validation import check_hsv_frame, check_rgb_frame


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV box; a hue interval with h_low > h_high wraps through 0."""

    h_low: float = 340.0
    h_high: float = 50.0
    s_low: float = 0.23
    s_high: float = 0.68
    v_low: float = 0.35
    v_high: float = 1.0

    def __post_init__(self):
        if self.s_low > self.s_high:
            raise ValueError("s_low must be <= s_high")
        if self.v_low > self.v_high:
            raise ValueError("v_low must be <= v_high")


def skin_threshold(frame: np.ndarray, hsv_range: HsvRange) -> np.ndarray:
    """Pixel set iff all three HSV channels lie in range (hue test wrap-aware)."""
    frame = check_hsv_frame(frame)
    h, s, v = frame[..., 0], frame[..., 1], frame[..., 2]
    if hsv_range.h_low <= hsv_range.h_high:
        h_ok = (h >= hsv_range.h_low) & (h <= hsv_range.h_high)
    else:
        h_ok = (h >= hsv_range.h_low) | (h <= hsv_range.h_high)
    s_ok = (s >= hsv_range.s_low) & (s <= hsv_range.s_high)
    v_ok = (v >= hsv_range.v_low) & (v <= hsv_range.v_high)
    return h_ok & s_ok & v_ok


def extract_hand_mask(frame: np.ndarray, skin_range: HsvRange | None = None,
                      grabcut_k: int = 5, grabcut_iterations: int = 5,
                      erode_radius: int = 1, blob_min_area: int = 64) -> HandMask:
    """Extract a single-component hand mask with fingertip and bounding box.

    Raises NoHandFound when no skin-range pixels survive the pipeline.
    """
    frame = check_rgb_frame(frame)
    skin_range = skin_range or HsvRange()

    skin = skin_threshold(rgb_to_hsv(frame), skin_range)
    if not skin.any():
        raise NoHandFound("no pixels in the skin color range")

    trimap = grabcut.seed_trimap(skin)
    refined = grabcut.refine_foreground(frame, trimap, iterations=grabcut_iterations,
                                        k=grabcut_k)
    mask = refined & skin
    mask = morphology.erode(mask, erode_radius)
    mask = morphology.remove_small_blobs(mask, blob_min_area)
    if not mask.any():
        raise NoHandFound("mask is empty after erosion and blob filtering")
    mask = morphology.largest_component(mask)

    return HandMask(mask=mask, fingertip=morphology.locate_fingertip(mask),
                    bbox=morphology.bounding_box(mask))


class HandMaskExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer from RGB frames to HandMask objects.

    Parameters mirror extract_hand_mask; fit is a no-op so the extractor can
    sit in sklearn pipelines.
    """

    def __init__(self, h_low=340.0, h_high=50.0, s_low=0.23, s_high=0.68,
                 v_low=0.35, v_high=1.0, grabcut_k=5, grabcut_iterations=5,
                 erode_radius=1, blob_min_area=64):
        self.h_low = h_low
        self.h_high = h_high
        self.s_low = s_low
        self.s_high = s_high
        self.v_low = v_low
        self.v_high = v_high
        self.grabcut_k = grabcut_k
        self.grabcut_iterations = grabcut_iterations
        self.erode_radius = erode_radius
        self.blob_min_area = blob_min_area

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        """Extract a HandMask per frame. X is a single frame or a list of frames."""
        single = isinstance(X, np.ndarray) and X.ndim == 3
        frames = [X] if single else list(X)
        out = [extract_hand_mask(f, skin_range=self.skin_range_,
                                 grabcut_k=self.grabcut_k,
                                 grabcut_iterations=self.grabcut_iterations,
                                 erode_radius=self.erode_radius,
                                 blob_min_area=self.blob_min_area)
               for f in frames]
        return out[0] if single else out

    @property
    def skin_range_(self) -> HsvRange:
        return HsvRange(self.h_low, self.h_high, self.s_low, self.s_high,
                        self.v_low, self.v_high)
