"""Unpaired domain translation: two generators, two patch discriminators,
adversarial plus cycle-consistency training, checkpointing and inference.

Training is CPU-deterministic for a fixed seed: model init, batch shuffling
and the replay buffer all draw from seeded generators, and there is a single
update stream.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch
from sklearn.base import BaseEstimator

from .datasets import DatasetIndex
from .exceptions import (DivergedLoss, EmptyDomain, NonFiniteScores,
                         ShapeIncompatible)
from .images import frame_to_tensor, load_image, tensor_to_frame
from .losses import adversarial_loss, cycle_loss, generator_adversarial_loss
from .networks import (DiscriminatorConfig, GeneratorConfig, build_generator,
                       build_patch_discriminator)
from .schedules import TrainSchedule, learning_rate
from .validation import check_is_fitted, check_rgb_frame

CHECKPOINT_VERSION = 1
LOSS_KEYS = ("adv_a", "adv_b", "cyc_a", "cyc_b")


@dataclass
class CycleCheckpoint:
    g_ab: torch.nn.Module
    g_ba: torch.nn.Module
    d_a: torch.nn.Module
    d_b: torch.nn.Module
    gen_cfg: GeneratorConfig
    disc_cfg: DiscriminatorConfig
    schedule: TrainSchedule
    epoch: int = 0
    loss_history: List[dict] = field(default_factory=list)

    def save(self, path) -> None:
        payload = {
            "format_version": CHECKPOINT_VERSION,
            "kind": "cyclegan",
            "epoch": self.epoch,
            "loss_history": self.loss_history,
            "configs": {"generator": asdict(self.gen_cfg),
                        "discriminator": asdict(self.disc_cfg),
                        "schedule": asdict(self.schedule)},
            "sections": {"g_ab": self.g_ab.state_dict(),
                         "g_ba": self.g_ba.state_dict(),
                         "d_a": self.d_a.state_dict(),
                         "d_b": self.d_b.state_dict()},
        }
        torch.save(payload, Path(path))

    @classmethod
    def load(cls, path) -> "CycleCheckpoint":
        payload = torch.load(Path(path), map_location="cpu", weights_only=False)
        if payload.get("kind") != "cyclegan":
            raise ValueError(f"{path} is not a cyclegan checkpoint")
        gen_cfg = GeneratorConfig(**payload["configs"]["generator"])
        disc_cfg = DiscriminatorConfig(**payload["configs"]["discriminator"])
        schedule = TrainSchedule(**payload["configs"]["schedule"])
        ckpt = cls(g_ab=build_generator(gen_cfg), g_ba=build_generator(gen_cfg),
                   d_a=build_patch_discriminator(disc_cfg),
                   d_b=build_patch_discriminator(disc_cfg),
                   gen_cfg=gen_cfg, disc_cfg=disc_cfg, schedule=schedule,
                   epoch=payload["epoch"], loss_history=payload["loss_history"])
        for name in ("g_ab", "g_ba", "d_a", "d_b"):
            getattr(ckpt, name).load_state_dict(payload["sections"][name])
        return ckpt


class ImageBuffer:
    """Replay pool of past generator outputs used for discriminator updates."""

    def __init__(self, max_size: int, rng: np.random.Generator):
        self.max_size = max_size
        self.rng = rng
        self.images: List[torch.Tensor] = []

    def query(self, batch: torch.Tensor) -> torch.Tensor:
        if self.max_size <= 0:
            return batch
        out = []
        for image in batch:
            image = image.unsqueeze(0)
            if len(self.images) < self.max_size:
                self.images.append(image)
                out.append(image)
            elif self.rng.random() > 0.5:
                i = int(self.rng.integers(self.max_size))
                out.append(self.images[i].clone())
                self.images[i] = image
            else:
                out.append(image)
        return torch.cat(out)


def _load_domain(index: DatasetIndex) -> List[torch.Tensor]:
    if not index.records:
        raise EmptyDomain("domain has no records")
    return [frame_to_tensor(load_image(r.image_path)) for r in index.records]


def train_cyclegan(domain_a: DatasetIndex, domain_b: DatasetIndex,
                   schedule: TrainSchedule, out_dir=None, *,
                   gen_cfg: Optional[GeneratorConfig] = None,
                   disc_cfg: Optional[DiscriminatorConfig] = None,
                   cycle_weight: float = 10.0, buffer_size: int = 50,
                   checkpoint_interval: int = 0) -> CycleCheckpoint:
    """Train the translation cycle between two image domains.

    Runs schedule.const_epochs + schedule.decay_epochs epochs; with a zero
    total the returned checkpoint is the seeded initialization with an empty
    loss history. Any non-finite loss aborts with DivergedLoss after saving
    the last good checkpoint (when out_dir is given).
    """
    gen_cfg = gen_cfg or GeneratorConfig()
    disc_cfg = disc_cfg or DiscriminatorConfig()
    images_a = _load_domain(domain_a)
    images_b = _load_domain(domain_b)
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(schedule.seed)
    ckpt = CycleCheckpoint(
        g_ab=build_generator(gen_cfg), g_ba=build_generator(gen_cfg),
        d_a=build_patch_discriminator(disc_cfg),
        d_b=build_patch_discriminator(disc_cfg),
        gen_cfg=gen_cfg, disc_cfg=disc_cfg, schedule=schedule)

    opt_g = torch.optim.Adam(
        itertools.chain(ckpt.g_ab.parameters(), ckpt.g_ba.parameters()),
        lr=schedule.lr0, betas=(schedule.beta1, schedule.beta2))
    opt_d_a = torch.optim.Adam(ckpt.d_a.parameters(), lr=schedule.lr0,
                               betas=(schedule.beta1, schedule.beta2))
    opt_d_b = torch.optim.Adam(ckpt.d_b.parameters(), lr=schedule.lr0,
                               betas=(schedule.beta1, schedule.beta2))

    rng = np.random.default_rng(schedule.seed)
    buffer_a = ImageBuffer(buffer_size, np.random.default_rng(schedule.seed + 1))
    buffer_b = ImageBuffer(buffer_size, np.random.default_rng(schedule.seed + 2))
    batch = schedule.batch_size
    steps = min(len(images_a), len(images_b)) // batch

    for epoch in range(schedule.total_epochs):
        lr = learning_rate(schedule, epoch)
        for opt in (opt_g, opt_d_a, opt_d_b):
            for group in opt.param_groups:
                group["lr"] = lr

        order_a = rng.permutation(len(images_a))
        order_b = rng.permutation(len(images_b))
        sums = dict.fromkeys(LOSS_KEYS, 0.0)
        for step in range(steps):
            a = torch.stack([images_a[i] for i in order_a[step * batch:(step + 1) * batch]])
            b = torch.stack([images_b[i] for i in order_b[step * batch:(step + 1) * batch]])

            try:
                # generator update: adversarial fit both directions plus cycles
                opt_g.zero_grad()
                fake_b = ckpt.g_ab(a)
                fake_a = ckpt.g_ba(b)
                g_adv_b = generator_adversarial_loss(ckpt.d_b(fake_b))
                g_adv_a = generator_adversarial_loss(ckpt.d_a(fake_a))
                cyc_a = cycle_loss(a, ckpt.g_ba(fake_b), cycle_weight)
                cyc_b = cycle_loss(b, ckpt.g_ab(fake_a), cycle_weight)
                g_total = g_adv_a + g_adv_b + cyc_a + cyc_b
                g_total.backward()
                opt_g.step()

                # discriminator updates on buffered fakes
                opt_d_a.zero_grad()
                d_loss_a, _ = adversarial_loss(
                    ckpt.d_a(a), ckpt.d_a(buffer_a.query(fake_a.detach())))
                d_loss_a.backward()
                opt_d_a.step()

                opt_d_b.zero_grad()
                d_loss_b, _ = adversarial_loss(
                    ckpt.d_b(b), ckpt.d_b(buffer_b.query(fake_b.detach())))
                d_loss_b.backward()
                opt_d_b.step()
            except NonFiniteScores as err:
                if out_dir is not None:
                    ckpt.save(out_dir / "cyclegan.pt")
                raise DivergedLoss(
                    f"non-finite scores at epoch {epoch} step {step}") from err

            values = {"adv_a": g_adv_a, "adv_b": g_adv_b, "cyc_a": cyc_a, "cyc_b": cyc_b}
            if not all(torch.isfinite(v) for v in [*values.values(), d_loss_a, d_loss_b]):
                if out_dir is not None:
                    ckpt.save(out_dir / "cyclegan.pt")
                raise DivergedLoss(f"non-finite loss at epoch {epoch} step {step}")
            for key, value in values.items():
                sums[key] += float(value.detach())

        ckpt.epoch = epoch + 1
        ckpt.loss_history.append({k: sums[k] / max(steps, 1) for k in LOSS_KEYS})
        if out_dir is not None and checkpoint_interval > 0 \
                and (epoch + 1) % checkpoint_interval == 0:
            ckpt.save(out_dir / f"cyclegan_epoch{epoch + 1:04d}.pt")

    if out_dir is not None:
        ckpt.save(out_dir / "cyclegan.pt")
        write_loss_csv(ckpt.loss_history, out_dir / "losses.csv")
    return ckpt


def write_loss_csv(history: List[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", *LOSS_KEYS])
        for epoch, row in enumerate(history):
            writer.writerow([epoch, *(f"{row[k]:.6f}" for k in LOSS_KEYS)])


def translate(frame: np.ndarray, gen: torch.nn.Module) -> np.ndarray:
    """Deterministic forward pass of one [0, 1] frame through a generator."""
    frame = check_rgb_frame(frame)
    stride = 2 ** gen.cfg.n_downsamples if hasattr(gen, "cfg") else 1
    if frame.shape[0] % stride or frame.shape[1] % stride:
        raise ShapeIncompatible(
            f"frame {frame.shape[:2]} not divisible by the generator stride {stride}")
    gen.eval()
    with torch.no_grad():
        out = gen(frame_to_tensor(frame).unsqueeze(0))[0]
    return tensor_to_frame(out)


def cycle_reconstruction_error(ckpt: CycleCheckpoint, domain_a: DatasetIndex,
                               domain_b: DatasetIndex, max_images: int = 0) -> float:
    """Mean per-pixel L1 round-trip error in [0, 1] units over both directions."""
    errors = []
    for index, g_fwd, g_back in ((domain_a, ckpt.g_ab, ckpt.g_ba),
                                 (domain_b, ckpt.g_ba, ckpt.g_ab)):
        records = index.records[:max_images] if max_images else index.records
        for record in records:
            frame = load_image(record.image_path)
            rec = translate(translate(frame, g_fwd), g_back)
            errors.append(float(np.abs(frame - rec).mean()))
    return float(np.mean(errors))


class CycleTranslator(BaseEstimator):
    """Estimator interface to the translation cycle.

    fit() trains on two DatasetIndex domains; transform() translates frames
    with the requested generator direction.
    """

    def __init__(self, base_channels=64, n_res_blocks=9, n_downsamples=2,
                 input_size=256, disc_channels=64, disc_layers=3, lr0=2e-4,
                 batch_size=1, const_epochs=400, decay_epochs=100, beta1=0.5,
                 beta2=0.999, cycle_weight=10.0, buffer_size=50, seed=0):
        self.base_channels = base_channels
        self.n_res_blocks = n_res_blocks
        self.n_downsamples = n_downsamples
        self.input_size = input_size
        self.disc_channels = disc_channels
        self.disc_layers = disc_layers
        self.lr0 = lr0
        self.batch_size = batch_size
        self.const_epochs = const_epochs
        self.decay_epochs = decay_epochs
        self.beta1 = beta1
        self.beta2 = beta2
        self.cycle_weight = cycle_weight
        self.buffer_size = buffer_size
        self.seed = seed
        self.checkpoint_ = None

    def fit(self, X: DatasetIndex, y: DatasetIndex, out_dir=None,
            checkpoint_interval: int = 0):
        """Train on domain X (source) and domain y (target)."""
        self.checkpoint_ = train_cyclegan(
            X, y, self.schedule_, out_dir,
            gen_cfg=self.generator_config_, disc_cfg=self.discriminator_config_,
            cycle_weight=self.cycle_weight, buffer_size=self.buffer_size,
            checkpoint_interval=checkpoint_interval)
        return self

    def transform(self, X, direction: str = "ab"):
        check_is_fitted(self, "checkpoint_")
        if direction not in ("ab", "ba"):
            raise ValueError("direction must be 'ab' or 'ba'")
        gen = self.checkpoint_.g_ab if direction == "ab" else self.checkpoint_.g_ba
        single = isinstance(X, np.ndarray) and X.ndim == 3
        frames = [X] if single else list(X)
        out = [translate(f, gen) for f in frames]
        return out[0] if single else out

    def save(self, path) -> None:
        check_is_fitted(self, "checkpoint_")
        self.checkpoint_.save(path)

    def load(self, path):
        self.checkpoint_ = CycleCheckpoint.load(path)
        return self

    @property
    def schedule_(self) -> TrainSchedule:
        return TrainSchedule(lr0=self.lr0, batch_size=self.batch_size,
                             const_epochs=self.const_epochs,
                             decay_epochs=self.decay_epochs, beta1=self.beta1,
                             beta2=self.beta2, seed=self.seed)

    @property
    def generator_config_(self) -> GeneratorConfig:
        return GeneratorConfig(input_size=self.input_size,
                               base_channels=self.base_channels,
                               n_res_blocks=self.n_res_blocks,
                               n_downsamples=self.n_downsamples)

    @property
    def discriminator_config_(self) -> DiscriminatorConfig:
        return DiscriminatorConfig.for_layers(self.disc_layers,
                                              base_channels=self.disc_channels)
