"""Deterministic toy fixtures: rendered skin-silhouette hands, shape domains
for translation training, constant-color domains for composer training, and
a ready-to-run workspace for the bundled pipeline demo.

All rendering is seeded; fixtures double as ground truth because the
silhouette mask, fingertip and box are constructed, not estimated.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .config import write_config
from .datasets import ANNOTATION_HEADER
from .images import save_image
from .morphology import bounding_box, locate_fingertip
from .types import HandMask

# inside the default skin HSV box (hue ~26 deg, sat ~0.44, val 0.8)
SKIN_RGB = (0.80, 0.60, 0.45)

# per-environment background base colors, all far outside the skin hue range
_BG_PALETTE = [(0.20, 0.30, 0.60), (0.15, 0.50, 0.30), (0.45, 0.20, 0.55),
               (0.10, 0.45, 0.55), (0.50, 0.45, 0.15), (0.30, 0.30, 0.35)]


def hand_silhouette(size: int, tip: Tuple[int, int], palm_radius: int,
                    finger_length: int, finger_halfwidth: int) -> np.ndarray:
    """Binary hand-like blob: a finger bar rising from a palm disk, topmost
    pixel at `tip`."""
    ys, xs = np.mgrid[0:size, 0:size]
    tx, ty = tip
    finger = ((np.abs(xs - tx) <= finger_halfwidth)
              & (ys >= ty) & (ys <= ty + finger_length))
    cy = ty + finger_length + palm_radius - 1
    palm = (xs - tx) ** 2 + (ys - cy) ** 2 <= palm_radius ** 2
    return finger | palm


def render_hand_frame(size: int, tip: Tuple[int, int], rng: np.random.Generator,
                      bg_rgb=(0.20, 0.30, 0.60), palm_radius: int = 7,
                      finger_length: int = 9, finger_halfwidth: int = 2):
    """Skin-colored silhouette on a textured background.

    Returns (frame, mask): frame in [0, 1], mask the exact silhouette.
    """
    mask = hand_silhouette(size, tip, palm_radius, finger_length, finger_halfwidth)
    frame = np.empty((size, size, 3), dtype=np.float64)
    gradient = np.linspace(-0.05, 0.05, size)[None, :, None]
    noise = rng.uniform(-0.05, 0.05, (size, size, 3))
    frame[:] = np.asarray(bg_rgb) + gradient + noise
    skin = np.asarray(SKIN_RGB) + rng.uniform(-0.02, 0.02, (size, size, 3))
    frame[mask] = skin[mask]
    return np.clip(frame, 0.0, 1.0), mask


def ground_truth_hand(size: int, tip: Tuple[int, int], **kwargs) -> HandMask:
    mask = hand_silhouette(size, tip, kwargs.get("palm_radius", 7),
                           kwargs.get("finger_length", 9),
                           kwargs.get("finger_halfwidth", 2))
    return HandMask(mask=mask, fingertip=locate_fingertip(mask),
                    bbox=bounding_box(mask))


def hand_geometry(size: int) -> dict:
    """Hand proportions scaled to the canvas so the blob stays interior."""
    return {"palm_radius": max(3, size // 9),
            "finger_length": max(4, size // 7),
            "finger_halfwidth": max(1, size // 32)}


def make_toy_dataset(root, environments: List[str], frames_per_env: int,
                     size: int = 64, seed: int = 0) -> None:
    """Write a small annotated dataset: skin hands on per-environment
    backgrounds, annotations.csv per environment directory."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    geometry = hand_geometry(size)
    height = geometry["finger_length"] + 2 * geometry["palm_radius"]
    max_tip_y = size - height - 3
    margin_x = geometry["palm_radius"] + 2
    for e, env in enumerate(environments):
        env_dir = root / env
        env_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for k in range(frames_per_env):
            tip = (int(rng.integers(margin_x, size - margin_x)),
                   int(rng.integers(size // 5, max_tip_y + 1)))
            frame, mask = render_hand_frame(size, tip, rng,
                                            bg_rgb=_BG_PALETTE[e % len(_BG_PALETTE)],
                                            **geometry)
            frame_id = f"{env}_{k:04d}"
            image_file = f"{frame_id}.png"
            save_image(frame, env_dir / image_file)
            box = bounding_box(mask)
            tip_px = locate_fingertip(mask)
            rows.append([frame_id, image_file, *box.as_tuple(), *tip_px])
        with open(env_dir / "annotations.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ANNOTATION_HEADER)
            writer.writerows(rows)


def make_shape_domains(root, n_per_domain: int, size: int = 64,
                       seed: int = 0) -> Tuple[str, str]:
    """Two unpaired domains for translation training: gray squares vs gray
    disks on light backgrounds. Returns the two environment names."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    for env, shape in (("squares", "square"), ("disks", "disk")):
        env_dir = root / env
        env_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for k in range(n_per_domain):
            half = int(rng.integers(size // 8, size // 4))
            cx = int(rng.integers(half + 1, size - half - 1))
            cy = int(rng.integers(half + 1, size - half - 1))
            gray = rng.uniform(0.2, 0.5)
            ys, xs = np.mgrid[0:size, 0:size]
            if shape == "square":
                mask = (np.abs(xs - cx) <= half) & (np.abs(ys - cy) <= half)
            else:
                mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= half ** 2
            frame = np.full((size, size, 3), 0.9) + rng.uniform(-0.02, 0.02,
                                                                (size, size, 3))
            frame[mask] = gray
            frame = np.clip(frame, 0.0, 1.0)
            frame_id = f"{env}_{k:04d}"
            image_file = f"{frame_id}.png"
            save_image(frame, env_dir / image_file)
            box = bounding_box(mask)
            rows.append([frame_id, image_file, *box.as_tuple(),
                         *locate_fingertip(mask)])
        with open(env_dir / "annotations.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ANNOTATION_HEADER)
            writer.writerows(rows)
    return "squares", "disks"


def make_color_domains(root, colors: Dict[str, Tuple[float, float, float]],
                       n_per_domain: int, size: int = 8) -> None:
    """Constant-color micro domains for composer training, with a small
    square hand mask annotated in each frame."""
    root = Path(root)
    for env, rgb in colors.items():
        env_dir = root / env
        env_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for k in range(n_per_domain):
            frame = np.full((size, size, 3), rgb, dtype=np.float64)
            frame_id = f"{env}_{k:04d}"
            image_file = f"{frame_id}.png"
            save_image(frame, env_dir / image_file)
            # fixed 2x2 hand block, fingertip at its top-left corner
            x0 = y0 = size // 2
            rows.append([frame_id, image_file, x0, y0, x0 + 1, y0 + 1, x0, y0])
        with open(env_dir / "annotations.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ANNOTATION_HEADER)
            writer.writerows(rows)


def block_mask(size: int, x0: int, y0: int, side: int = 2) -> HandMask:
    mask = np.zeros((size, size), dtype=bool)
    mask[y0:y0 + side, x0:x0 + side] = True
    return HandMask(mask=mask, fingertip=(x0, y0), bbox=bounding_box(mask))


def write_toy_workspace(out_dir, size: int = 64, seed: int = 0) -> Path:
    """Create a runnable demo workspace: toy dataset plus config.cfg tuned to
    finish the full pipeline in minutes on a CPU. Returns the config path."""
    out = Path(out_dir)
    data_root = out / "data"
    make_toy_dataset(data_root, ["kitchen", "desk"], frames_per_env=4,
                     size=size, seed=seed)
    config_path = out / "config.cfg"
    write_config({
        # relative to the config file, so the workspace can be moved around
        "dataset.root": "data",
        "pipeline.stages": ["ingest", "extract", "synth", "compose",
                            "assemble", "export", "metrics"],
        "pipeline.seed": seed,
        "gesture.kind": "circle",
        "gesture.n_frames": 8,
        "gesture.center_x": size / 2,
        "gesture.center_y": size / 2 - 4,
        "gesture.radius": 7.0,
        "gesture.orient_mask": False,
        "composer.base_channels": 16,
        "composer.n_res_blocks": 2,
        "composer.disc_channels": 16,
        "composer.disc_layers": 2,
        "composer.fg_epochs": 6,
        "composer.bg_epochs": 8,
        "composer.batch_size": 4,
    }, config_path)
    return config_path
