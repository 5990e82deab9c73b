"""Stage orchestration: the toolkit's end-to-end surface.

Stages run in the order named by ``pipeline.stages`` and communicate through
a context that lazily reloads prerequisites from earlier stage outputs, so a
single stage can also run standalone against an existing output directory.
Each stage writes only inside its own subdirectory of the output root;
partial failures leave completed outputs intact.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, Optional

from .composer import ComposerCheckpoint, SceneComposer
from .config import Config
from .cyclegan import CycleCheckpoint, train_cyclegan
from .datasets import DatasetIndex, load_dataset, split_by_environment
from .exceptions import ConfigError, GestureSynthError, StageError
from .extraction import HandMaskExtractor
from .gestures import GestureSpec, MaskSequence, synthesize_mask_sequence
from .images import load_image, load_mask, save_mask
from .networks import DiscriminatorConfig, GeneratorConfig
from .schedules import TrainSchedule
from .types import BoundingBox, HandMask
from .video import (assemble_video, background_jitter, export_video,
                    import_video, sha256_file, translate_video)

logger = logging.getLogger(__name__)


class PipelineContext:
    """Carries intermediate artifacts between stages, reloading from disk
    when a stage runs without its predecessors in the same process."""

    def __init__(self, config: Config, out_root: Path, seed: int):
        self.config = config
        self.out_root = Path(out_root)
        self.seed = seed
        self.index: Optional[DatasetIndex] = None
        self.masks: Optional[Dict[str, HandMask]] = None
        self.sequence: Optional[MaskSequence] = None
        self.composer: Optional[ComposerCheckpoint] = None
        self.video = None

    def stage_dir(self, stage: str) -> Path:
        path = self.out_root / stage
        path.mkdir(parents=True, exist_ok=True)
        return path

    def require_index(self) -> DatasetIndex:
        if self.index is None:
            root = self.config["dataset.root"]
            if root is None:
                raise ConfigError("dataset.root is not set")
            self.index = load_dataset(root, strict=self.config["dataset.strict"])
        return self.index

    def require_masks(self) -> Dict[str, HandMask]:
        if self.masks is None:
            listing = self.out_root / "extract" / "extracted.jsonl"
            if not listing.is_file():
                raise FileNotFoundError(f"no extracted masks at {listing}; "
                                        "run the extract stage first")
            self.masks = _read_masks(listing)
        return self.masks

    def require_sequence(self) -> MaskSequence:
        if self.sequence is None:
            meta_path = self.out_root / "synth" / "sequence.json"
            if not meta_path.is_file():
                raise FileNotFoundError(f"no mask sequence at {meta_path}; "
                                        "run the synth stage first")
            self.sequence = _read_sequence(meta_path)
        return self.sequence

    def require_composer(self) -> ComposerCheckpoint:
        if self.composer is None:
            path = self.out_root / "compose" / "composer.pt"
            if not path.is_file():
                raise FileNotFoundError(f"no composer checkpoint at {path}; "
                                        "run the compose stage first")
            self.composer = ComposerCheckpoint.load(path)
        return self.composer

    def require_video(self):
        if self.video is None:
            src = self.out_root / "assemble"
            if not (src / "manifest.json").is_file():
                raise FileNotFoundError(f"no assembled video under {src}; "
                                        "run the assemble stage first")
            self.video = import_video(src)
        return self.video


def stage_ingest(ctx: PipelineContext) -> None:
    index = ctx.require_index()
    summary = {"n_records": len(index),
               "environments": sorted(index.environments),
               "root": str(ctx.config["dataset.root"])}
    with open(ctx.stage_dir("ingest") / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    logger.info("ingest: %d records from %d environments", len(index),
                len(index.environments))


def stage_extract(ctx: PipelineContext) -> None:
    index = ctx.require_index()
    cfg = ctx.config
    extractor = HandMaskExtractor(
        h_low=cfg["skin.h_low"], h_high=cfg["skin.h_high"],
        s_low=cfg["skin.s_low"], s_high=cfg["skin.s_high"],
        v_low=cfg["skin.v_low"], v_high=cfg["skin.v_high"],
        grabcut_k=cfg["grabcut.k"], grabcut_iterations=cfg["grabcut.iterations"],
        erode_radius=cfg["erode.radius"], blob_min_area=cfg["blob.min_area"])
    limit = cfg["extract.max_frames"]
    records = index.records[:limit] if limit else index.records

    out = ctx.stage_dir("extract")
    masks: Dict[str, HandMask] = {}
    with open(out / "extracted.jsonl", "w") as fh:
        for record in records:
            hand = extractor.transform(load_image(record.image_path))
            mask_file = f"mask_{record.frame_id}.png"
            save_mask(hand.mask, out / mask_file)
            fh.write(json.dumps({"frame_id": record.frame_id,
                                 "mask_file": mask_file,
                                 "fingertip": list(hand.fingertip),
                                 "bbox": list(hand.bbox.as_tuple())}) + "\n")
            masks[record.frame_id] = hand
    ctx.masks = masks
    logger.info("extract: %d masks", len(masks))


def stage_synth(ctx: PipelineContext) -> None:
    masks = ctx.require_masks()
    reference_id = ctx.config["synth.reference_frame"]
    if not reference_id:
        reference_id = sorted(masks)[0]
    if reference_id not in masks:
        raise KeyError(f"synth.reference_frame {reference_id!r} has no mask")
    spec = gesture_spec_from_config(ctx.config)
    seq = synthesize_mask_sequence(masks[reference_id], spec)

    out = ctx.stage_dir("synth")
    frames_meta = []
    for k, hand in enumerate(seq.frames):
        mask_file = f"mask_{k:05d}.png"
        save_mask(hand.mask, out / mask_file)
        frames_meta.append({"mask_file": mask_file,
                            "fingertip": list(hand.fingertip),
                            "bbox": list(hand.bbox.as_tuple())})
    ref_file = "reference.png"
    save_mask(seq.reference.mask, out / ref_file)
    meta = {"gesture": _spec_dict(spec), "reference_frame": reference_id,
            "reference_mask": ref_file,
            "reference_fingertip": list(seq.reference.fingertip),
            "frames": frames_meta}
    with open(out / "sequence.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    ctx.sequence = seq
    logger.info("synth: %d frames of %s gesture", len(seq), spec.kind)


def stage_compose(ctx: PipelineContext) -> None:
    index = ctx.require_index()
    masks = ctx.require_masks()
    cfg = ctx.config
    composer = SceneComposer(
        base_channels=cfg["composer.base_channels"],
        n_res_blocks=cfg["composer.n_res_blocks"],
        n_downsamples=cfg["composer.n_downsamples"],
        disc_channels=cfg["composer.disc_channels"],
        disc_layers=cfg["composer.disc_layers"],
        noise_channels=cfg["composer.noise_channels"],
        tip_sigma=cfg["composer.tip_sigma"], l1_weight=cfg["composer.l1_weight"],
        fg_epochs=cfg["composer.fg_epochs"], bg_epochs=cfg["composer.bg_epochs"],
        batch_size=cfg["composer.batch_size"], lr0=cfg["composer.lr0"],
        seed=ctx.seed)
    composer.fit(index, masks, out_dir=ctx.stage_dir("compose"))
    ctx.composer = composer.checkpoint_
    logger.info("compose: trained on %d frames, %d domains", len(index),
                len(ctx.composer.vocabulary))


def stage_assemble(ctx: PipelineContext) -> None:
    seq = ctx.require_sequence()
    checkpoint = ctx.require_composer()
    domain = ctx.config["assemble.domain"] or checkpoint.vocabulary[0]
    video = assemble_video(
        seq, checkpoint, domain, ctx.seed,
        background_per_frame=ctx.config["assemble.background_per_frame"],
        fps=ctx.config["pipeline.fps"], config_snapshot=ctx.config.snapshot())
    ckpt_file = ctx.out_root / "compose" / "composer.pt"
    if ckpt_file.is_file():
        video.provenance["checkpoint_digests"] = {"composer": sha256_file(ckpt_file)}
    export_video(video, ctx.stage_dir("assemble"))
    ctx.video = video
    logger.info("assemble: %d frames in domain %s", len(video), domain)


def stage_translate(ctx: PipelineContext) -> None:
    video = ctx.require_video()
    ckpt_path = ctx.config["translate.checkpoint"]
    if ckpt_path is None:
        raise ConfigError("translate.checkpoint is not set")
    checkpoint = CycleCheckpoint.load(ckpt_path)
    direction = ctx.config["translate.direction"]
    gen = checkpoint.g_ab if direction == "ab" else checkpoint.g_ba
    translated = translate_video(video, gen)
    translated.provenance.setdefault("checkpoint_digests", {})["translator"] = \
        sha256_file(ckpt_path)
    export_video(translated, ctx.stage_dir("translate"))
    ctx.video = translated
    logger.info("translate: %d frames via %s", len(translated), direction)


def stage_export(ctx: PipelineContext) -> None:
    manifest = export_video(ctx.require_video(), ctx.stage_dir("export"))
    logger.info("export: wrote %s", manifest)


def stage_metrics(ctx: PipelineContext) -> None:
    report = background_jitter(ctx.require_video())
    out = ctx.stage_dir("metrics")
    with open(out / "jitter.json", "w") as fh:
        json.dump({"per_transition": report.per_transition,
                   "mean_jitter": report.mean_jitter}, fh, indent=2)
    logger.info("metrics: mean background jitter %.6f", report.mean_jitter)


STAGES = {
    "ingest": stage_ingest,
    "extract": stage_extract,
    "synth": stage_synth,
    "compose": stage_compose,
    "assemble": stage_assemble,
    "translate": stage_translate,
    "export": stage_export,
    "metrics": stage_metrics,
}


def run_stages(config: Config, out_root, stages, seed: Optional[int] = None) -> None:
    """Run the named stages in order; raises ConfigError or StageError."""
    seed = config["pipeline.seed"] if seed is None else seed
    for stage in stages:
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}")
    if "ingest" in stages and config["dataset.root"] is None:
        raise ConfigError("dataset.root is not set")
    if "translate" in stages and config["translate.checkpoint"] is None:
        raise ConfigError("translate.checkpoint is not set")

    ctx = PipelineContext(config, Path(out_root), seed)
    for stage in stages:
        logger.info("running stage %s", stage)
        try:
            STAGES[stage](ctx)
        except ConfigError:
            raise
        except (GestureSynthError, OSError, KeyError, ValueError) as err:
            raise StageError(stage, err) from err
        # each completed stage directory records what reproduces it
        with open(ctx.stage_dir(stage) / "provenance.json", "w") as fh:
            json.dump({"stage": stage, "seed": seed,
                       "config": config.snapshot()}, fh, indent=2, sort_keys=True)


def run_pipeline(config: Config, out_root, seed: Optional[int] = None) -> int:
    """Run every stage named in pipeline.stages; returns 0 on success."""
    run_stages(config, out_root, config["pipeline.stages"], seed)
    return 0


def train_translator(config: Config, out_root, seed: Optional[int] = None) -> Path:
    """Train the domain translator between two environment splits."""
    cfg = config
    seed = cfg["pipeline.seed"] if seed is None else seed
    root = cfg["dataset.root"]
    if root is None:
        raise ConfigError("dataset.root is not set")
    source_envs = cfg["cyclegan.source_envs"]
    target_envs = cfg["cyclegan.target_envs"]
    if not source_envs or not target_envs:
        raise ConfigError("cyclegan.source_envs and cyclegan.target_envs must be set")

    index = load_dataset(root, strict=cfg["dataset.strict"])
    domain_a, domain_b = split_by_environment(index, source_envs, target_envs)
    schedule = TrainSchedule(
        lr0=cfg["cyclegan.lr0"], batch_size=cfg["cyclegan.batch_size"],
        const_epochs=cfg["cyclegan.const_epochs"],
        decay_epochs=cfg["cyclegan.decay_epochs"], beta1=cfg["cyclegan.beta1"],
        beta2=cfg["cyclegan.beta2"], seed=seed)
    gen_cfg = GeneratorConfig(input_size=cfg["cyclegan.input_size"],
                              base_channels=cfg["cyclegan.base_channels"],
                              n_res_blocks=cfg["cyclegan.n_res_blocks"],
                              n_downsamples=cfg["cyclegan.n_downsamples"])
    disc_cfg = DiscriminatorConfig.for_layers(
        cfg["cyclegan.disc_layers"], base_channels=cfg["cyclegan.disc_channels"])
    out = Path(out_root) / "translate_model"
    out.mkdir(parents=True, exist_ok=True)
    try:
        train_cyclegan(domain_a, domain_b, schedule, out, gen_cfg=gen_cfg,
                       disc_cfg=disc_cfg, cycle_weight=cfg["cyclegan.cycle_weight"],
                       buffer_size=cfg["cyclegan.buffer_size"],
                       checkpoint_interval=cfg["cyclegan.checkpoint_interval"])
    except GestureSynthError as err:
        raise StageError("train-translate", err) from err
    return out / "cyclegan.pt"


def _read_masks(listing: Path) -> Dict[str, HandMask]:
    masks: Dict[str, HandMask] = {}
    base = listing.parent
    with open(listing) as fh:
        for line in fh:
            rec = json.loads(line)
            mask = load_mask(base / rec["mask_file"])
            masks[rec["frame_id"]] = HandMask(
                mask=mask, fingertip=tuple(rec["fingertip"]),
                bbox=BoundingBox(*rec["bbox"]))
    return masks


def _read_sequence(meta_path: Path) -> MaskSequence:
    base = meta_path.parent
    with open(meta_path) as fh:
        meta = json.load(fh)
    spec = GestureSpec(**{**meta["gesture"],
                          "center": tuple(meta["gesture"]["center"])})
    reference = HandMask.from_mask(load_mask(base / meta["reference_mask"]),
                                   tuple(meta["reference_fingertip"]))
    frames = []
    for item in meta["frames"]:
        frames.append(HandMask(mask=load_mask(base / item["mask_file"]),
                               fingertip=tuple(item["fingertip"]),
                               bbox=BoundingBox(*item["bbox"])))
    return MaskSequence(frames=frames, spec=spec, reference=reference)


def _spec_dict(spec: GestureSpec) -> dict:
    return {"kind": spec.kind, "n_frames": spec.n_frames, "step": spec.step,
            "center": list(spec.center), "radius": spec.radius,
            "start_angle": spec.start_angle, "orient_mask": spec.orient_mask}


def gesture_spec_from_config(cfg: Config) -> GestureSpec:
    kind = cfg["gesture.kind"]
    return GestureSpec(
        kind=kind, n_frames=cfg["gesture.n_frames"], step=cfg["gesture.step"],
        center=(cfg["gesture.center_x"], cfg["gesture.center_y"]),
        radius=cfg["gesture.radius"] if kind == "circle" else 0.0,
        start_angle=cfg["gesture.start_angle"],
        orient_mask=cfg["gesture.orient_mask"])
