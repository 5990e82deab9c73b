"""RGB <-> HSV conversion on float rasters.

Hexcone model: H in degrees [0, 360), S and V in [0, 1]. Grays (max == min)
get H = 0 and S = 0 so the conversion is total and deterministic.
"""

from __future__ import annotations

import numpy as np

from .validation import check_hsv_frame, check_rgb_frame


def rgb_to_hsv(frame: np.ndarray) -> np.ndarray:
    """Convert an H x W x 3 RGB raster in [0, 1] to HSV."""
    frame = check_rgb_frame(frame)
    r, g, b = frame[..., 0], frame[..., 1], frame[..., 2]
    v = frame.max(axis=-1)
    c = v - frame.min(axis=-1)  # chroma

    s = np.zeros_like(v)
    np.divide(c, v, out=s, where=v > 0)

    h = np.zeros_like(v)
    nonzero = c > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        hr = ((g - b) / c) % 6.0
        hg = (b - r) / c + 2.0
        hb = (r - g) / c + 4.0
    h = np.where(nonzero & (v == r), hr, h)
    h = np.where(nonzero & (v == g) & (v != r), hg, h)
    h = np.where(nonzero & (v == b) & (v != r) & (v != g), hb, h)
    h = (h * 60.0) % 360.0

    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(frame: np.ndarray) -> np.ndarray:
    """Convert an H x W x 3 HSV raster (H in [0, 360), S, V in [0, 1]) to RGB."""
    frame = check_hsv_frame(frame)
    h, s, v = frame[..., 0], frame[..., 1], frame[..., 2]
    c = v * s
    hp = h / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - c

    zeros = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    r = np.choose(sector, [c, x, zeros, zeros, x, c])
    g = np.choose(sector, [x, c, c, x, zeros, zeros])
    b = np.choose(sector, [zeros, zeros, x, c, c, x])

    return np.stack([r + m, g + m, b + m], axis=-1)
