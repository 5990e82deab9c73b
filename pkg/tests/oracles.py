"""Independent brute-force oracles.

Everything here is written as explicit per-pixel Python loops against the
textbook definitions, deliberately sharing no code with the package, so the
vectorized implementations can be checked bit-for-bit.
"""

import colorsys
import math

import numpy as np


def erode_oracle(mask, radius):
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    for y in range(h):
        for x in range(w):
            ok = True
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    ny, nx = y + dy, x + dx
                    if not (0 <= ny < h and 0 <= nx < w) or not mask[ny, nx]:
                        ok = False
                        break
                if not ok:
                    break
            out[y, x] = ok
    return out


def label_components_oracle(mask):
    """8-connected labeling by BFS; returns (labels, n)."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=int)
    n = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                n += 1
                queue = [(y, x)]
                labels[y, x] = n
                while queue:
                    cy, cx = queue.pop()
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = cy + dy, cx + dx
                            if (0 <= ny < h and 0 <= nx < w and mask[ny, nx]
                                    and labels[ny, nx] == 0):
                                labels[ny, nx] = n
                                queue.append((ny, nx))
    return labels, n


def remove_small_blobs_oracle(mask, min_area):
    labels, n = label_components_oracle(mask)
    out = np.zeros_like(mask, dtype=bool)
    for c in range(1, n + 1):
        area = int((labels == c).sum())
        if area >= min_area:
            out[labels == c] = True
    return out


def bounding_box_oracle(mask):
    """(x_min, y_min, x_max, y_max) by exhaustive min/max scan."""
    x_min = y_min = 10 ** 9
    x_max = y_max = -1
    h, w = mask.shape
    for y in range(h):
        for x in range(w):
            if mask[y, x]:
                x_min, x_max = min(x_min, x), max(x_max, x)
                y_min, y_max = min(y_min, y), max(y_max, y)
    return (x_min, y_min, x_max, y_max)


def transform_point_oracle(point, transform):
    """Homogeneous 3x3 multiply through numpy."""
    m = np.eye(3)
    m[:2, :] = np.asarray(transform)
    v = m @ np.array([point[0], point[1], 1.0])
    return (v[0], v[1])


def warp_mask_oracle(mask, transform):
    """Inverse-mapping warp with an independently inverted matrix and
    explicit per-pixel loops."""
    a = np.asarray(transform, dtype=float)
    inv_lin = np.linalg.inv(a[:, :2])
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    for y in range(h):
        for x in range(w):
            sx, sy = inv_lin @ (np.array([x, y], dtype=float) - a[:, 2])
            rx, ry = int(round(sx)), int(round(sy))
            if 0 <= rx < w and 0 <= ry < h and mask[ry, rx]:
                out[y, x] = True
    return out


def rgb_to_hsv_oracle(frame):
    """Per-pixel colorsys conversion, hue rescaled to degrees."""
    h, w = frame.shape[:2]
    out = np.zeros_like(frame, dtype=float)
    for y in range(h):
        for x in range(w):
            hh, ss, vv = colorsys.rgb_to_hsv(*frame[y, x])
            out[y, x] = (hh * 360.0, ss, vv)
    return out


def skin_threshold_oracle(hsv_frame, rng):
    """Per-pixel membership loop; rng is an HsvRange-like object."""
    h, w = hsv_frame.shape[:2]
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            hh, ss, vv = hsv_frame[y, x]
            if rng.h_low <= rng.h_high:
                h_ok = rng.h_low <= hh <= rng.h_high
            else:
                h_ok = hh >= rng.h_low or hh <= rng.h_high
            out[y, x] = (h_ok and rng.s_low <= ss <= rng.s_high
                         and rng.v_low <= vv <= rng.v_high)
    return out


def composite_oracle(fg, bg, mask):
    h, w = mask.shape
    out = np.zeros_like(fg)
    for y in range(h):
        for x in range(w):
            out[y, x] = fg[y, x] if mask[y, x] else bg[y, x]
    return out


def hue_distance(a, b):
    """Circular distance between two hues in degrees."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def random_rigid_transform(rng, max_shift=8.0):
    """Invertible rigid 2x3 transform with random rotation and shift."""
    angle = rng.uniform(-math.pi, math.pi)
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, rng.uniform(-max_shift, max_shift)],
                     [s, c, rng.uniform(-max_shift, max_shift)]])


def random_blob_mask(rng, size):
    """Union of a few random rectangles and disks; may be empty."""
    mask = np.zeros((size, size), dtype=bool)
    ys, xs = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(1, 4))):
        if rng.random() < 0.5:
            x0, y0 = rng.integers(0, size, 2)
            wdt, hgt = rng.integers(1, size // 2, 2)
            mask[y0:y0 + hgt, x0:x0 + wdt] = True
        else:
            cx, cy = rng.integers(0, size, 2)
            r = int(rng.integers(1, size // 3))
            mask |= (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    return mask
