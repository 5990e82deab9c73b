"""Adversarial and cycle-consistency objectives (least-squares GAN form)."""

from __future__ import annotations

import torch

from .exceptions import NonFiniteScores, ShapeMismatch


def adversarial_loss(scores_real: torch.Tensor, scores_fake: torch.Tensor):
    """Least-squares adversarial objective.

    Returns (d_loss, g_loss): the discriminator pushes real scores to 1 and
    fake scores to 0; the generator pushes fake scores to 1.
    """
    if not torch.isfinite(scores_real).all():
        raise NonFiniteScores("real score map contains non-finite values")
    g_loss = generator_adversarial_loss(scores_fake)
    d_loss = ((scores_real - 1.0) ** 2).mean() + (scores_fake ** 2).mean()
    return d_loss, g_loss


def generator_adversarial_loss(scores_fake: torch.Tensor) -> torch.Tensor:
    """Generator side of the least-squares objective: push fakes toward 1."""
    if not torch.isfinite(scores_fake).all():
        raise NonFiniteScores("fake score map contains non-finite values")
    return ((scores_fake - 1.0) ** 2).mean()


def cycle_loss(x: torch.Tensor, x_reconstructed: torch.Tensor,
               weight: float = 10.0) -> torch.Tensor:
    """Weighted L1 reconstruction penalty for a round-trip translation."""
    if x.shape != x_reconstructed.shape:
        raise ShapeMismatch(f"{tuple(x.shape)} vs {tuple(x_reconstructed.shape)}")
    return weight * (x - x_reconstructed).abs().mean()
