"""Image file IO and numpy <-> torch conversions.

Frames travel as H x W x 3 float arrays in [0, 1]; the networks see CHW
tensors in [-1, 1]. Masks are written as 1-bit PNGs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / 255.0


def save_image(frame: np.ndarray, path) -> None:
    arr = np.clip(np.asarray(frame), 0.0, 1.0)
    Image.fromarray((arr * 255.0).round().astype(np.uint8)).save(Path(path))


def load_mask(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("1"), dtype=bool)


def save_mask(mask: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(mask, dtype=bool)).convert("1").save(Path(path))


def frame_to_tensor(frame: np.ndarray) -> torch.Tensor:
    """H x W x 3 in [0, 1] -> 3 x H x W in [-1, 1]."""
    t = torch.from_numpy(np.ascontiguousarray(frame, dtype=np.float32))
    return t.permute(2, 0, 1) * 2.0 - 1.0


def tensor_to_frame(tensor: torch.Tensor) -> np.ndarray:
    """3 x H x W in [-1, 1] -> H x W x 3 in [0, 1]."""
    arr = tensor.detach().permute(1, 2, 0).numpy()
    return np.clip((arr + 1.0) / 2.0, 0.0, 1.0).astype(np.float32)
