"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .exceptions import ShapeMismatch, ValueOutOfRange


def check_rgb_frame(frame, name="frame") -> np.ndarray:
    """Validate an H x W x 3 float raster with channel values in [0, 1]."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ShapeMismatch(f"{name} must be H x W x 3, got shape {frame.shape}")
    if frame.size and (frame.min() < 0.0 or frame.max() > 1.0):
        raise ValueOutOfRange(f"{name} channel values must lie in [0, 1]")
    return frame


def check_hsv_frame(frame, name="frame") -> np.ndarray:
    """Validate an H x W x 3 HSV raster: H in [0, 360), S and V in [0, 1]."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ShapeMismatch(f"{name} must be H x W x 3, got shape {frame.shape}")
    if frame.size:
        h, s, v = frame[..., 0], frame[..., 1], frame[..., 2]
        if h.min() < 0.0 or h.max() >= 360.0:
            raise ValueOutOfRange(f"{name} hue must lie in [0, 360)")
        if min(s.min(), v.min()) < 0.0 or max(s.max(), v.max()) > 1.0:
            raise ValueOutOfRange(f"{name} saturation/value must lie in [0, 1]")
    return frame


def check_binary_mask(mask, name="mask") -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got shape {mask.shape}")
    return mask.astype(bool)


def check_same_shape(a, b, name_a="a", name_b="b") -> None:
    if np.shape(a)[:2] != np.shape(b)[:2]:
        raise ShapeMismatch(
            f"{name_a} shape {np.shape(a)[:2]} != {name_b} shape {np.shape(b)[:2]}")


def check_is_fitted(estimator, attribute: str) -> None:
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() or load() first")
