"""Gesture trajectories and affine mask animation.

A gesture is a sequence of fingertip poses. Each pose induces a rigid
transform from the reference hand mask, which is rasterized by inverse
mapping with nearest-neighbor lookup so masks stay binary.

Image coordinates are y-down, so "up" decreases y and positive rotation
angles turn from +x toward +y (clockwise on screen).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import EmptyFrame, MaskClippedWarning, SingularTransform
from .morphology import bounding_box
from .types import HandMask
from .validation import check_binary_mask

LINEAR_KINDS = ("up", "down", "left", "right")
GESTURE_KINDS = LINEAR_KINDS + ("circle",)

_DIRECTIONS = {"up": (0.0, -1.0), "down": (0.0, 1.0),
               "left": (-1.0, 0.0), "right": (1.0, 0.0)}

_DET_EPS = 1e-9


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


@dataclass(frozen=True)
class Pose2D:
    position: Tuple[float, float]
    orientation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "orientation", normalize_angle(self.orientation))


@dataclass(frozen=True)
class GestureSpec:
    kind: str
    n_frames: int
    step: float = 0.0
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0
    start_angle: float = 0.0
    orient_mask: bool = False

    def __post_init__(self):
        if self.kind not in GESTURE_KINDS:
            raise ValueError(f"unknown gesture kind {self.kind!r}")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.kind == "circle" and self.radius <= 0:
            raise ValueError("circle gesture needs radius > 0")
        if self.kind in LINEAR_KINDS and self.step < 0:
            raise ValueError("step must be >= 0")


def make_trajectory(spec: GestureSpec, start: Tuple[float, float]) -> List[Pose2D]:
    """Fingertip poses for the gesture, one per frame.

    Linear kinds advance `step` pixels per frame from `start` with zero
    orientation. The circle ignores `start`: frame k sits at angle
    start_angle + 2*pi*k/n_frames on the circle, oriented along the tangent.
    """
    poses = []
    if spec.kind == "circle":
        cx, cy = spec.center
        for k in range(spec.n_frames):
            angle = spec.start_angle + 2.0 * math.pi * k / spec.n_frames
            position = (cx + spec.radius * math.cos(angle),
                        cy + spec.radius * math.sin(angle))
            poses.append(Pose2D(position, angle + math.pi / 2.0))
    else:
        ux, uy = _DIRECTIONS[spec.kind]
        x0, y0 = start
        for k in range(spec.n_frames):
            poses.append(Pose2D((x0 + k * spec.step * ux, y0 + k * spec.step * uy)))
    return poses


def pose_to_affine(reference: Pose2D, target: Pose2D, orient_mask: bool) -> np.ndarray:
    """2x3 rigid transform mapping reference.position exactly onto target.position.

    With orient_mask, the mask is first rotated about reference.position by the
    orientation delta; otherwise the transform is a pure translation.
    """
    rx, ry = reference.position
    tx, ty = target.position
    if orient_mask:
        d = target.orientation - reference.orientation
        c, s = math.cos(d), math.sin(d)
    else:
        c, s = 1.0, 0.0
    # rotate about reference.position, then translate by the position delta
    return np.array([[c, -s, tx - c * rx + s * ry],
                     [s, c, ty - s * rx - c * ry]], dtype=np.float64)


def transform_point(point, transform: np.ndarray) -> Tuple[float, float]:
    x, y = point
    t = np.asarray(transform, dtype=np.float64)
    return (t[0, 0] * x + t[0, 1] * y + t[0, 2],
            t[1, 0] * x + t[1, 1] * y + t[1, 2])


def invert_affine(transform: np.ndarray) -> np.ndarray:
    t = np.asarray(transform, dtype=np.float64)
    det = t[0, 0] * t[1, 1] - t[0, 1] * t[1, 0]
    if abs(det) <= _DET_EPS:
        raise SingularTransform(f"determinant {det} too close to zero")
    inv = np.empty((2, 3))
    inv[0, 0] = t[1, 1] / det
    inv[0, 1] = -t[0, 1] / det
    inv[1, 0] = -t[1, 0] / det
    inv[1, 1] = t[0, 0] / det
    inv[0, 2] = -(inv[0, 0] * t[0, 2] + inv[0, 1] * t[1, 2])
    inv[1, 2] = -(inv[1, 0] * t[0, 2] + inv[1, 1] * t[1, 2])
    return inv


def warp_mask(mask: np.ndarray, transform: np.ndarray) -> np.ndarray:
    """Inverse-mapping warp: output pixel q is set iff round(t^-1(q)) is an
    in-bounds set pixel of the source. Content leaving the canvas is clipped."""
    mask = check_binary_mask(mask)
    inv = invert_affine(transform)
    h, w = mask.shape
    ys, xs = np.mgrid[0:h, 0:w]
    src_x = np.rint(inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]).astype(np.int64)
    src_y = np.rint(inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]).astype(np.int64)
    valid = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    out = np.zeros_like(mask)
    out[valid] = mask[src_y[valid], src_x[valid]]
    return out


def nearest_set_pixel(mask: np.ndarray, point) -> Tuple[int, int]:
    """Set pixel closest to a continuous point; ties prefer smaller y, then x."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyFrame("mask has no set pixels")
    px, py = point
    d2 = (xs - px) ** 2 + (ys - py) ** 2
    i = np.lexsort((xs, ys, d2))[0]
    return (int(xs[i]), int(ys[i]))


@dataclass
class MaskSequence:
    frames: List[HandMask]
    spec: GestureSpec
    reference: HandMask
    poses: List[Pose2D] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)


def synthesize_mask_sequence(reference: HandMask, spec: GestureSpec,
                             clip_warn_fraction: float = 0.2) -> MaskSequence:
    """Animate a reference mask along a gesture trajectory.

    Frame k warps the reference so its fingertip lands on pose k; the frame's
    fingertip label snaps to the set pixel nearest the transformed fingertip.
    Emits MaskClippedWarning when a frame loses more than clip_warn_fraction
    of the reference area; an entirely clipped frame raises EmptyFrame.
    """
    reference.validate()
    start = (float(reference.fingertip[0]), float(reference.fingertip[1]))
    poses = make_trajectory(spec, start)
    anchor = Pose2D(start, poses[0].orientation)

    frames = []
    ref_area = reference.area
    worst_loss = 0.0
    for k, pose in enumerate(poses):
        t = pose_to_affine(anchor, pose, spec.orient_mask)
        mask = warp_mask(reference.mask, t)
        if not mask.any():
            raise EmptyFrame(f"frame {k} is fully clipped")
        tip = nearest_set_pixel(mask, transform_point(reference.fingertip, t))
        frames.append(HandMask(mask=mask, fingertip=tip, bbox=bounding_box(mask)))
        worst_loss = max(worst_loss, 1.0 - mask.sum() / ref_area)
    if worst_loss > clip_warn_fraction:
        warnings.warn(f"gesture clips up to {worst_loss:.0%} of the reference mask",
                      MaskClippedWarning, stacklevel=2)
    return MaskSequence(frames=frames, spec=spec, reference=reference, poses=poses)


class GestureSynthesizer(BaseEstimator, TransformerMixin):
    """Transformer from a reference HandMask to an animated MaskSequence."""

    def __init__(self, kind="right", n_frames=8, step=4.0, center_x=128.0,
                 center_y=128.0, radius=40.0, start_angle=0.0, orient_mask=False):
        self.kind = kind
        self.n_frames = n_frames
        self.step = step
        self.center_x = center_x
        self.center_y = center_y
        self.radius = radius
        self.start_angle = start_angle
        self.orient_mask = orient_mask

    def fit(self, X=None, y=None):
        return self

    def transform(self, X: HandMask) -> MaskSequence:
        return synthesize_mask_sequence(X, self.spec_)

    @property
    def spec_(self) -> GestureSpec:
        radius = self.radius if self.kind == "circle" else 0.0
        return GestureSpec(kind=self.kind, n_frames=self.n_frames, step=self.step,
                           center=(self.center_x, self.center_y), radius=radius,
                           start_angle=self.start_angle, orient_mask=self.orient_mask)
