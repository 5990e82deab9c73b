"""Mask-conditioned scene composition.

Two generators share the residual encoder-decoder family: a background
generator mapping (noise, domain one-hot) to a scene, and a foreground
generator mapping (hand mask, fingertip heatmap, background) to a hand
rendering. Final frames are hard-composited: off-mask pixels are taken
bit-for-bit from the background, so exported labels stay exact.

Training is two-phase. Background "real" targets are dataset frames with
the hand region filled from the nearest unmasked pixel; the foreground
phase then learns to re-render the hand on that background, against the
original frame.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import torch
from scipy import ndimage
from sklearn.base import BaseEstimator

from .datasets import DatasetIndex
from .exceptions import (DivergedLoss, MissingMask, NonFiniteScores,
                         ShapeIncompatible, UnknownDomain, UntrainedModel)
from .images import frame_to_tensor, load_image, tensor_to_frame
from .losses import adversarial_loss, generator_adversarial_loss
from .networks import (DiscriminatorConfig, GeneratorConfig, build_generator,
                       build_patch_discriminator)
from .schedules import ComposerSchedule
from .types import HandMask, LayoutMap
from .validation import (check_binary_mask, check_is_fitted, check_rgb_frame,
                         check_same_shape)

CHECKPOINT_VERSION = 1


def composite(fg: np.ndarray, bg: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Per-pixel select: fg where the mask is set, bg elsewhere."""
    fg = np.asarray(fg)
    bg = np.asarray(bg)
    mask = check_binary_mask(mask)
    check_same_shape(fg, bg, "fg", "bg")
    check_same_shape(fg, mask, "fg", "mask")
    return np.where(mask[..., None], fg, bg)


def fingertip_channel(layout: LayoutMap, sigma: float = 5.0) -> np.ndarray:
    """Isotropic Gaussian heatmap encoding the fingertip position, peak 1.0."""
    h, w = layout.mask.shape
    ys, xs = np.mgrid[0:h, 0:w]
    fx, fy = layout.fingertip
    d2 = (xs - fx) ** 2.0 + (ys - fy) ** 2.0
    return np.exp(-d2 / (2.0 * sigma * sigma)).astype(np.float32)


def inpaint_nearest(frame: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Replace masked pixels with the value of the nearest unmasked pixel."""
    frame = check_rgb_frame(frame)
    mask = check_binary_mask(mask)
    check_same_shape(frame, mask, "frame", "mask")
    if not mask.any():
        return frame.copy()
    if mask.all():
        return frame.copy()
    _, (iy, ix) = ndimage.distance_transform_edt(mask, return_indices=True)
    return frame[iy, ix]


@dataclass
class ComposerCheckpoint:
    g_bg: torch.nn.Module
    d_bg: torch.nn.Module
    g_fg: torch.nn.Module
    d_fg: torch.nn.Module
    vocabulary: List[str]
    schedule: ComposerSchedule
    base_gen_cfg: GeneratorConfig
    base_disc_cfg: DiscriminatorConfig
    noise_channels: int = 1
    tip_sigma: float = 5.0
    l1_weight: float = 10.0
    bg_epochs_done: int = 0
    fg_epochs_done: int = 0
    histories: Dict[str, List[dict]] = field(default_factory=lambda: {"bg": [], "fg": []})

    def save(self, path) -> None:
        payload = {
            "format_version": CHECKPOINT_VERSION,
            "kind": "composer",
            "vocabulary": self.vocabulary,
            "epochs": {"bg": self.bg_epochs_done, "fg": self.fg_epochs_done},
            "histories": self.histories,
            "configs": {"generator": asdict(self.base_gen_cfg),
                        "discriminator": asdict(self.base_disc_cfg),
                        "schedule": asdict(self.schedule),
                        "noise_channels": self.noise_channels,
                        "tip_sigma": self.tip_sigma,
                        "l1_weight": self.l1_weight},
            "sections": {name: getattr(self, name).state_dict()
                         for name in ("g_bg", "d_bg", "g_fg", "d_fg")},
        }
        torch.save(payload, Path(path))

    @classmethod
    def load(cls, path) -> "ComposerCheckpoint":
        payload = torch.load(Path(path), map_location="cpu", weights_only=False)
        if payload.get("kind") != "composer":
            raise ValueError(f"{path} is not a composer checkpoint")
        cfg = payload["configs"]
        ckpt = _build_checkpoint(
            vocabulary=payload["vocabulary"],
            schedule=ComposerSchedule(**cfg["schedule"]),
            base_gen_cfg=GeneratorConfig(**cfg["generator"]),
            base_disc_cfg=DiscriminatorConfig(**cfg["discriminator"]),
            noise_channels=cfg["noise_channels"], tip_sigma=cfg["tip_sigma"],
            l1_weight=cfg["l1_weight"])
        ckpt.bg_epochs_done = payload["epochs"]["bg"]
        ckpt.fg_epochs_done = payload["epochs"]["fg"]
        ckpt.histories = payload["histories"]
        for name in ("g_bg", "d_bg", "g_fg", "d_fg"):
            getattr(ckpt, name).load_state_dict(payload["sections"][name])
        return ckpt


def _build_checkpoint(vocabulary, schedule, base_gen_cfg, base_disc_cfg,
                      noise_channels, tip_sigma, l1_weight) -> ComposerCheckpoint:
    n_domains = len(vocabulary)
    gen_bg = _with_channels(base_gen_cfg, noise_channels + n_domains, 3)
    gen_fg = _with_channels(base_gen_cfg, 5, 3)  # mask + heatmap + bg RGB
    disc_bg = _disc_with_channels(base_disc_cfg, 3 + n_domains)
    disc_fg = _disc_with_channels(base_disc_cfg, 5 + 3)
    return ComposerCheckpoint(
        g_bg=build_generator(gen_bg), d_bg=build_patch_discriminator(disc_bg),
        g_fg=build_generator(gen_fg), d_fg=build_patch_discriminator(disc_fg),
        vocabulary=list(vocabulary), schedule=schedule, base_gen_cfg=base_gen_cfg,
        base_disc_cfg=base_disc_cfg, noise_channels=noise_channels,
        tip_sigma=tip_sigma, l1_weight=l1_weight)


def _with_channels(cfg: GeneratorConfig, in_channels: int, out_channels: int):
    # norm-free so constant conditioning channels (domain one-hots) survive
    return GeneratorConfig(input_size=cfg.input_size, base_channels=cfg.base_channels,
                           n_res_blocks=cfg.n_res_blocks,
                           n_downsamples=cfg.n_downsamples,
                           in_channels=in_channels, out_channels=out_channels,
                           norm="none")


def _disc_with_channels(cfg: DiscriminatorConfig, in_channels: int):
    return DiscriminatorConfig(patch_receptive_field=cfg.patch_receptive_field,
                               base_channels=cfg.base_channels, n_layers=cfg.n_layers,
                               in_channels=in_channels, kernel=cfg.kernel)


def _one_hot_planes(index: int, n: int, h: int, w: int) -> torch.Tensor:
    planes = torch.zeros(n, h, w)
    planes[index] = 1.0
    return planes


def _bg_noise(noise_channels: int, h: int, w: int, seed: int) -> torch.Tensor:
    gen = torch.Generator().manual_seed(int(seed))
    return torch.randn(noise_channels, h, w, generator=gen)


def _fg_condition(mask: np.ndarray, tip_heatmap: np.ndarray,
                  bg: np.ndarray) -> torch.Tensor:
    layers = [torch.from_numpy(mask.astype(np.float32)),
              torch.from_numpy(tip_heatmap.astype(np.float32))]
    return torch.cat([torch.stack(layers), frame_to_tensor(bg)])


def train_composer(dataset: DatasetIndex, masks: Dict[str, HandMask],
                   schedule: ComposerSchedule, out_dir=None, *,
                   gen_cfg: Optional[GeneratorConfig] = None,
                   disc_cfg: Optional[DiscriminatorConfig] = None,
                   noise_channels: int = 1, tip_sigma: float = 5.0,
                   l1_weight: float = 10.0) -> ComposerCheckpoint:
    """Train background (bg_epochs) then foreground (fg_epochs) generators.

    `masks` maps every frame_id in the dataset to its HandMask; a missing
    entry raises MissingMask before any training starts.
    """
    gen_cfg = gen_cfg or GeneratorConfig()
    disc_cfg = disc_cfg or DiscriminatorConfig()
    missing = [r.frame_id for r in dataset.records if r.frame_id not in masks]
    if missing:
        raise MissingMask(f"no mask for frames: {missing[:5]}")
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    vocabulary = sorted(dataset.environments)
    torch.manual_seed(schedule.seed)
    ckpt = _build_checkpoint(vocabulary, schedule, gen_cfg, disc_cfg,
                             noise_channels, tip_sigma, l1_weight)

    # precompute per-record tensors: real frame, inpainted background, condition
    reals, bgs, conds, domains = [], [], [], []
    for record in dataset.records:
        frame = load_image(record.image_path)
        hand = masks[record.frame_id]
        bg = inpaint_nearest(frame, hand.mask)
        layout = LayoutMap(mask=hand.mask, fingertip=hand.fingertip,
                           domain_label=record.environment)
        reals.append(frame_to_tensor(frame))
        bgs.append(frame_to_tensor(bg))
        conds.append(_fg_condition(hand.mask, fingertip_channel(layout, tip_sigma), bg))
        domains.append(vocabulary.index(record.environment))

    rng = np.random.default_rng(schedule.seed)
    _train_bg_phase(ckpt, bgs, domains, schedule, rng)
    _train_fg_phase(ckpt, reals, bgs, conds, schedule, rng)

    if out_dir is not None:
        ckpt.save(out_dir / "composer.pt")
        write_composer_csv(ckpt.histories, out_dir / "composer_losses.csv")
    return ckpt


def _adam(module, schedule):
    return torch.optim.Adam(module.parameters(), lr=schedule.lr0,
                            betas=(schedule.beta1, schedule.beta2))


def _train_bg_phase(ckpt, bgs, domains, schedule, rng):
    n = len(bgs)
    n_domains = len(ckpt.vocabulary)
    h, w = bgs[0].shape[-2:]
    opt_g, opt_d = _adam(ckpt.g_bg, schedule), _adam(ckpt.d_bg, schedule)
    steps = max(n // schedule.batch_size, 1)
    for epoch in range(schedule.bg_epochs):
        order = rng.permutation(n)
        sum_d = sum_g = 0.0
        for step in range(steps):
            picks = order[step * schedule.batch_size:(step + 1) * schedule.batch_size]
            if len(picks) == 0:
                picks = order[:1]
            real = torch.stack([bgs[i] for i in picks])
            onehot = torch.stack([_one_hot_planes(domains[i], n_domains, h, w)
                                  for i in picks])
            noise = torch.stack([_bg_noise(ckpt.noise_channels, h, w,
                                           rng.integers(2 ** 31)) for _ in picks])
            try:
                fake = ckpt.g_bg(torch.cat([noise, onehot], dim=1))

                opt_d.zero_grad()
                d_loss, _ = adversarial_loss(
                    ckpt.d_bg(torch.cat([real, onehot], dim=1)),
                    ckpt.d_bg(torch.cat([fake.detach(), onehot], dim=1)))
                d_loss.backward()
                opt_d.step()

                opt_g.zero_grad()
                g_loss = generator_adversarial_loss(
                    ckpt.d_bg(torch.cat([fake, onehot], dim=1)))
                g_loss.backward()
                opt_g.step()
            except NonFiniteScores as err:
                raise DivergedLoss(f"bg phase diverged at epoch {epoch}") from err

            if not (torch.isfinite(d_loss) and torch.isfinite(g_loss)):
                raise DivergedLoss(f"bg phase diverged at epoch {epoch}")
            sum_d += float(d_loss.detach())
            sum_g += float(g_loss.detach())
        ckpt.histories["bg"].append({"loss_d": sum_d / steps, "loss_g": sum_g / steps})
        ckpt.bg_epochs_done = epoch + 1


def _train_fg_phase(ckpt, reals, bgs, conds, schedule, rng):
    n = len(reals)
    opt_g, opt_d = _adam(ckpt.g_fg, schedule), _adam(ckpt.d_fg, schedule)
    steps = max(n // schedule.batch_size, 1)
    for epoch in range(schedule.fg_epochs):
        order = rng.permutation(n)
        sum_d = sum_g = 0.0
        for step in range(steps):
            picks = order[step * schedule.batch_size:(step + 1) * schedule.batch_size]
            if len(picks) == 0:
                picks = order[:1]
            real = torch.stack([reals[i] for i in picks])
            bg = torch.stack([bgs[i] for i in picks])
            cond = torch.stack([conds[i] for i in picks])
            mask = cond[:, :1]  # first condition channel is the layout mask

            try:
                raw = ckpt.g_fg(cond)
                fake = mask * raw + (1.0 - mask) * bg  # hard composition

                opt_d.zero_grad()
                d_loss, _ = adversarial_loss(
                    ckpt.d_fg(torch.cat([cond, real], dim=1)),
                    ckpt.d_fg(torch.cat([cond, fake.detach()], dim=1)))
                d_loss.backward()
                opt_d.step()

                opt_g.zero_grad()
                g_adv = generator_adversarial_loss(
                    ckpt.d_fg(torch.cat([cond, fake], dim=1)))
                g_loss = g_adv + ckpt.l1_weight * (fake - real).abs().mean()
                g_loss.backward()
                opt_g.step()
            except NonFiniteScores as err:
                raise DivergedLoss(f"fg phase diverged at epoch {epoch}") from err

            if not (torch.isfinite(d_loss) and torch.isfinite(g_loss)):
                raise DivergedLoss(f"fg phase diverged at epoch {epoch}")
            sum_d += float(d_loss.detach())
            sum_g += float(g_loss.detach())
        ckpt.histories["fg"].append({"loss_d": sum_d / steps, "loss_g": sum_g / steps})
        ckpt.fg_epochs_done = epoch + 1


def write_composer_csv(histories: Dict[str, List[dict]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phase", "epoch", "loss_d", "loss_g"])
        for phase in ("bg", "fg"):
            for epoch, row in enumerate(histories[phase]):
                writer.writerow([phase, epoch, f"{row['loss_d']:.6f}",
                                 f"{row['loss_g']:.6f}"])


def generate_background(ckpt: ComposerCheckpoint, domain_label: str,
                        noise_seed: int, size) -> np.ndarray:
    """Deterministic background sample for a domain label, in [0, 1]."""
    if domain_label not in ckpt.vocabulary:
        raise UnknownDomain(f"{domain_label!r} not in {ckpt.vocabulary}")
    h, w = size
    stride = 2 ** ckpt.base_gen_cfg.n_downsamples
    if h % stride or w % stride:
        raise ShapeIncompatible(f"size {size} not divisible by stride {stride}")
    noise = _bg_noise(ckpt.noise_channels, h, w, noise_seed)
    onehot = _one_hot_planes(ckpt.vocabulary.index(domain_label),
                             len(ckpt.vocabulary), h, w)
    ckpt.g_bg.eval()
    with torch.no_grad():
        out = ckpt.g_bg(torch.cat([noise, onehot]).unsqueeze(0))[0]
    return tensor_to_frame(out)


def generate_foreground(ckpt: ComposerCheckpoint, layout: LayoutMap,
                        bg: np.ndarray) -> np.ndarray:
    """Render the hand of `layout` onto `bg`; off-mask pixels equal bg exactly."""
    bg = check_rgb_frame(bg)
    mask = check_binary_mask(layout.mask)
    check_same_shape(mask, bg, "layout.mask", "bg")
    cond = _fg_condition(mask, fingertip_channel(layout, ckpt.tip_sigma), bg)
    ckpt.g_fg.eval()
    with torch.no_grad():
        raw = ckpt.g_fg(cond.unsqueeze(0))[0]
    return composite(tensor_to_frame(raw), bg, mask)


class SceneComposer(BaseEstimator):
    """Estimator interface to the mask-conditioned composer.

    fit(X, y) takes a DatasetIndex and a frame_id -> HandMask mapping;
    afterwards backgrounds and composited frames can be sampled.
    """

    def __init__(self, base_channels=32, n_res_blocks=4, n_downsamples=2,
                 input_size=256, disc_channels=32, disc_layers=3,
                 noise_channels=1, tip_sigma=5.0, l1_weight=10.0,
                 fg_epochs=100, bg_epochs=200, batch_size=4, lr0=2e-4,
                 beta1=0.5, beta2=0.999, seed=0):
        self.base_channels = base_channels
        self.n_res_blocks = n_res_blocks
        self.n_downsamples = n_downsamples
        self.input_size = input_size
        self.disc_channels = disc_channels
        self.disc_layers = disc_layers
        self.noise_channels = noise_channels
        self.tip_sigma = tip_sigma
        self.l1_weight = l1_weight
        self.fg_epochs = fg_epochs
        self.bg_epochs = bg_epochs
        self.batch_size = batch_size
        self.lr0 = lr0
        self.beta1 = beta1
        self.beta2 = beta2
        self.seed = seed
        self.checkpoint_ = None

    def fit(self, X: DatasetIndex, y: Dict[str, HandMask], out_dir=None):
        self.checkpoint_ = train_composer(
            X, y, self.schedule_, out_dir,
            gen_cfg=GeneratorConfig(input_size=self.input_size,
                                    base_channels=self.base_channels,
                                    n_res_blocks=self.n_res_blocks,
                                    n_downsamples=self.n_downsamples),
            disc_cfg=DiscriminatorConfig.for_layers(
                self.disc_layers, base_channels=self.disc_channels),
            noise_channels=self.noise_channels, tip_sigma=self.tip_sigma,
            l1_weight=self.l1_weight)
        return self

    def generate_background(self, domain_label: str, noise_seed: int, size):
        check_is_fitted(self, "checkpoint_")
        return generate_background(self.checkpoint_, domain_label, noise_seed, size)

    def generate_foreground(self, layout: LayoutMap, bg: np.ndarray):
        check_is_fitted(self, "checkpoint_")
        if self.checkpoint_.fg_epochs_done == 0 and self.checkpoint_.bg_epochs_done == 0:
            raise UntrainedModel("composer has not been trained")
        return generate_foreground(self.checkpoint_, layout, bg)

    @property
    def vocabulary_(self) -> List[str]:
        check_is_fitted(self, "checkpoint_")
        return self.checkpoint_.vocabulary

    def save(self, path) -> None:
        check_is_fitted(self, "checkpoint_")
        self.checkpoint_.save(path)

    def load(self, path):
        self.checkpoint_ = ComposerCheckpoint.load(path)
        return self

    @property
    def schedule_(self) -> ComposerSchedule:
        return ComposerSchedule(fg_epochs=self.fg_epochs, bg_epochs=self.bg_epochs,
                                batch_size=self.batch_size, lr0=self.lr0,
                                beta1=self.beta1, beta2=self.beta2, seed=self.seed)
