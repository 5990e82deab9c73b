"""Ingestion of egocentric hand-frame datasets with bbox/fingertip annotations.

Expected layout: one subdirectory per environment, each holding image files
plus an ``annotations.csv`` with header
``frame_id,image_file,x_min,y_min,x_max,y_max,tip_x,tip_y``. Coordinates are
integer pixels, origin top-left, boxes inclusive on both ends.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Set, Tuple

from PIL import Image

from .exceptions import (DatasetError, ImageNotFound, MalformedAnnotationLine,
                         MissingAnnotationFile, OverlappingSplit,
                         UnknownEnvironment)
from .types import BoundingBox

logger = logging.getLogger(__name__)

ANNOTATION_FILE = "annotations.csv"
ANNOTATION_HEADER = ["frame_id", "image_file", "x_min", "y_min", "x_max", "y_max",
                     "tip_x", "tip_y"]


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    image_path: str
    bbox: BoundingBox
    fingertip: Tuple[int, int]
    environment: str


@dataclass
class DatasetIndex:
    records: List[FrameRecord] = field(default_factory=list)
    environments: Set[str] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.records)


def load_dataset(root_path, strict: bool = False) -> DatasetIndex:
    """Load every annotated frame under root_path.

    Records whose annotations are malformed or violate the invariants
    (fingertip inside bbox, bbox inside image bounds, unique frame_id) are
    skipped with a logged warning; with strict=True the first problem raises.
    A missing annotations.csv always raises MissingAnnotationFile.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} does not exist")

    index = DatasetIndex()
    seen_ids = set()
    for env_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        env = env_dir.name
        ann_path = env_dir / ANNOTATION_FILE
        if not ann_path.is_file():
            raise MissingAnnotationFile(f"{env_dir} has no {ANNOTATION_FILE}")
        for record in _read_annotations(ann_path, env, seen_ids, strict):
            index.records.append(record)
            index.environments.add(record.environment)
            seen_ids.add(record.frame_id)
    index.records.sort(key=lambda r: (r.environment, r.frame_id))
    if not index.records:
        raise DatasetError(f"no valid records under {root}")
    return index


def _read_annotations(ann_path: Path, env: str, seen_ids, strict: bool):
    with open(ann_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ANNOTATION_HEADER:
            raise MalformedAnnotationLine(ann_path, 1, f"bad header {header}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                yield _parse_row(row, ann_path, line_number, env, seen_ids)
            except (MalformedAnnotationLine, ImageNotFound):
                if strict:
                    raise
                logger.warning("skipping record at %s:%d", ann_path, line_number,
                               exc_info=True)


def _parse_row(row, ann_path, line_number, env, seen_ids) -> FrameRecord:
    if len(row) != 8:
        raise MalformedAnnotationLine(ann_path, line_number,
                                      f"expected 8 fields, got {len(row)}")
    frame_id, image_file = row[0], row[1]
    try:
        x_min, y_min, x_max, y_max, tip_x, tip_y = (int(v) for v in row[2:])
    except ValueError as err:
        raise MalformedAnnotationLine(ann_path, line_number, str(err)) from err

    image_path = ann_path.parent / image_file
    if not image_path.is_file():
        raise ImageNotFound(str(image_path))
    if frame_id in seen_ids:
        raise MalformedAnnotationLine(ann_path, line_number,
                                      f"duplicate frame_id {frame_id!r}")
    try:
        bbox = BoundingBox(x_min, y_min, x_max, y_max)
    except ValueError as err:
        raise MalformedAnnotationLine(ann_path, line_number, str(err)) from err
    if not bbox.contains((tip_x, tip_y)):
        raise MalformedAnnotationLine(ann_path, line_number,
                                      f"fingertip ({tip_x},{tip_y}) outside bbox")
    with Image.open(image_path) as im:
        width, height = im.size
    if not (0 <= x_min and x_max < width and 0 <= y_min and y_max < height):
        raise MalformedAnnotationLine(ann_path, line_number,
                                      f"bbox {bbox.as_tuple()} outside {width}x{height} image")
    return FrameRecord(frame_id=frame_id, image_path=str(image_path), bbox=bbox,
                       fingertip=(tip_x, tip_y), environment=env)


def save_dataset(index: DatasetIndex, root_path) -> None:
    """Write annotations.csv per environment (images must already exist)."""
    root = Path(root_path)
    by_env = {}
    for record in index.records:
        by_env.setdefault(record.environment, []).append(record)
    for env, records in by_env.items():
        env_dir = root / env
        env_dir.mkdir(parents=True, exist_ok=True)
        with open(env_dir / ANNOTATION_FILE, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ANNOTATION_HEADER)
            for r in records:
                writer.writerow([r.frame_id, Path(r.image_path).name,
                                 *r.bbox.as_tuple(), *r.fingertip])


def split_by_environment(index: DatasetIndex, source_envs, target_envs):
    """Partition records into (source, target) indices by environment label.

    Records from environments in neither set are dropped; input ordering is
    preserved in both outputs.
    """
    source_envs, target_envs = set(source_envs), set(target_envs)
    overlap = source_envs & target_envs
    if overlap:
        raise OverlappingSplit(f"environments in both splits: {sorted(overlap)}")
    unknown = (source_envs | target_envs) - index.environments
    if unknown:
        raise UnknownEnvironment(f"not in dataset: {sorted(unknown)}")

    source = DatasetIndex(environments=source_envs)
    target = DatasetIndex(environments=target_envs)
    for record in index.records:
        if record.environment in source_envs:
            source.records.append(record)
        elif record.environment in target_envs:
            target.records.append(record)
    return source, target
