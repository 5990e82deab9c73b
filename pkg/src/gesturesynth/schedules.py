"""Training schedules: optimizer settings and the piecewise learning rate."""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import ConfigInvalid


@dataclass(frozen=True)
class TrainSchedule:
    """Adam-based schedule: constant learning rate for const_epochs, then a
    linear decay to zero over decay_epochs."""

    lr0: float = 2e-4
    batch_size: int = 1
    const_epochs: int = 400
    decay_epochs: int = 100
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigInvalid("batch_size must be >= 1")
        if self.lr0 <= 0:
            raise ConfigInvalid("lr0 must be > 0")
        if self.const_epochs < 0 or self.decay_epochs < 0:
            raise ConfigInvalid("epoch counts must be >= 0")

    @property
    def total_epochs(self) -> int:
        return self.const_epochs + self.decay_epochs


def learning_rate(schedule: TrainSchedule, epoch: int) -> float:
    """Learning rate at an epoch index in [0, const_epochs + decay_epochs]."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    if epoch < schedule.const_epochs:
        return schedule.lr0
    if schedule.decay_epochs == 0:
        return 0.0
    frac = (epoch - schedule.const_epochs) / schedule.decay_epochs
    return schedule.lr0 * max(0.0, 1.0 - frac)


@dataclass(frozen=True)
class ComposerSchedule:
    """Two-phase composer training lengths (foreground and background)."""

    fg_epochs: int = 100
    bg_epochs: int = 200
    batch_size: int = 4
    lr0: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigInvalid("batch_size must be >= 1")
        if self.lr0 <= 0:
            raise ConfigInvalid("lr0 must be > 0")
        if self.fg_epochs < 0 or self.bg_epochs < 0:
            raise ConfigInvalid("epoch counts must be >= 0")
