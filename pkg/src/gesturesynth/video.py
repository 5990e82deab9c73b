"""Labelled video assembly, domain translation, export, and coherence metrics.

Videos are directories of zero-padded PNG frames plus an annotations.jsonl
(one record per frame) and a manifest.json carrying provenance. Encoded
containers are deliberately avoided: lossless frames keep label checks
bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch

from .composer import ComposerCheckpoint, generate_background, generate_foreground
from .cyclegan import translate
from .exceptions import (EmptySequence, LabelValidityWarning, TooFewFrames)
from .gestures import MaskSequence
from .types import BoundingBox, LayoutMap, Point
from .images import load_image, load_mask, save_image, save_mask

MANIFEST_NAME = "manifest.json"
ANNOTATIONS_NAME = "annotations.jsonl"
FRAME_PATTERN = "frame_{:05d}.png"
MASK_PATTERN = "mask_{:05d}.png"


@dataclass
class LabeledFrame:
    image: np.ndarray  # H x W x 3 in [0, 1]
    bbox: BoundingBox
    fingertip: Point
    gesture_label: str
    domain_label: str
    frame_index: int
    mask: Optional[np.ndarray] = None

    def annotation(self) -> dict:
        return {"frame_index": self.frame_index,
                "bbox": list(self.bbox.as_tuple()),
                "fingertip": list(self.fingertip),
                "gesture": self.gesture_label,
                "domain": self.domain_label}


@dataclass
class LabeledVideo:
    frames: List[LabeledFrame]
    fps: float = 30.0
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class JitterReport:
    per_transition: List[float]
    mean_jitter: float


def assemble_video(seq: MaskSequence, checkpoint: ComposerCheckpoint,
                   domain_label: str, seed: int, *,
                   background_per_frame: bool = False, fps: float = 30.0,
                   config_snapshot: Optional[dict] = None) -> LabeledVideo:
    """Render a labelled video from a mask sequence.

    By default one background is generated for the whole video and reused per
    frame, which keeps the background region static. background_per_frame
    samples a fresh background per frame instead (the jittery mode, kept for
    measurement).
    """
    if len(seq) == 0:
        raise EmptySequence("mask sequence has no frames")
    size = seq.frames[0].mask.shape
    shared_bg = None
    if not background_per_frame:
        shared_bg = generate_background(checkpoint, domain_label, seed, size)

    frames = []
    for k, hand in enumerate(seq.frames):
        bg = shared_bg
        if background_per_frame:
            bg = generate_background(checkpoint, domain_label, seed + k, size)
        layout = LayoutMap(mask=hand.mask, fingertip=hand.fingertip,
                           domain_label=domain_label)
        image = generate_foreground(checkpoint, layout, bg)
        frames.append(LabeledFrame(image=image, bbox=hand.bbox,
                                   fingertip=hand.fingertip,
                                   gesture_label=seq.spec.kind,
                                   domain_label=domain_label, frame_index=k,
                                   mask=hand.mask.copy()))
    provenance = {
        "seeds": {"background": seed},
        "domain": domain_label,
        "gesture": seq.spec.kind,
        "background_per_frame": background_per_frame,
        "config": dict(config_snapshot or {}),
    }
    return LabeledVideo(frames=frames, fps=fps, provenance=provenance)


def translate_video(video: LabeledVideo, gen: torch.nn.Module) -> LabeledVideo:
    """Translate every frame to a new domain; labels are carried over as-is."""
    warnings.warn("labels are carried across translation without re-verification",
                  LabelValidityWarning, stacklevel=2)
    frames = [LabeledFrame(image=translate(f.image, gen), bbox=f.bbox,
                           fingertip=f.fingertip, gesture_label=f.gesture_label,
                           domain_label=f.domain_label, frame_index=f.frame_index,
                           mask=None if f.mask is None else f.mask.copy())
              for f in video.frames]
    provenance = dict(video.provenance)
    provenance["translated"] = True
    return LabeledVideo(frames=frames, fps=video.fps, provenance=provenance)


def background_jitter(video: LabeledVideo) -> JitterReport:
    """Mean absolute frame-to-frame change outside the hand masks, per transition."""
    if len(video) < 2:
        raise TooFewFrames("jitter needs at least 2 frames")
    per_transition = []
    for a, b in zip(video.frames, video.frames[1:]):
        h, w = a.image.shape[:2]
        union = np.zeros((h, w), dtype=bool)
        for f in (a, b):
            if f.mask is not None:
                union |= f.mask
        region = ~union
        if not region.any():
            per_transition.append(0.0)
            continue
        diff = np.abs(a.image[region] - b.image[region])
        per_transition.append(float(diff.mean()))
    return JitterReport(per_transition=per_transition,
                        mean_jitter=float(np.mean(per_transition)))


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def export_video(video: LabeledVideo, out_dir) -> Path:
    """Write frames, masks, annotations.jsonl and manifest.json; returns the
    manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame in video.frames:
        save_image(frame.image, out / FRAME_PATTERN.format(frame.frame_index))
        if frame.mask is not None:
            save_mask(frame.mask, out / MASK_PATTERN.format(frame.frame_index))
    with open(out / ANNOTATIONS_NAME, "w") as fh:
        for frame in video.frames:
            fh.write(json.dumps(frame.annotation()) + "\n")
    manifest = {
        "format_version": 1,
        "n_frames": len(video),
        "fps": video.fps,
        "provenance": video.provenance,
    }
    manifest_path = out / MANIFEST_NAME
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest_path


def import_video(in_dir) -> LabeledVideo:
    """Rebuild a LabeledVideo from an exported directory."""
    src = Path(in_dir)
    with open(src / MANIFEST_NAME) as fh:
        manifest = json.load(fh)
    frames = []
    with open(src / ANNOTATIONS_NAME) as fh:
        for line in fh:
            rec = json.loads(line)
            k = rec["frame_index"]
            image = load_image(src / FRAME_PATTERN.format(k))
            mask_path = src / MASK_PATTERN.format(k)
            mask = load_mask(mask_path) if mask_path.exists() else None
            frames.append(LabeledFrame(
                image=image, bbox=BoundingBox(*rec["bbox"]),
                fingertip=tuple(rec["fingertip"]), gesture_label=rec["gesture"],
                domain_label=rec["domain"], frame_index=k, mask=mask))
    return LabeledVideo(frames=frames, fps=manifest["fps"],
                        provenance=manifest["provenance"])
