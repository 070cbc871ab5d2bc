"""Adversarial training objectives.

The generator minimizes a critic score on its outputs plus a weighted
per-pixel binary cross entropy against the channel target. The critic
maximizes the score gap between real and generated masks, regularized by a
penalty that pulls its gradient norm toward 1 on random interpolates between
the two. Any non-finite loss raises TrainingDiverged so the caller can
checkpoint and abort instead of training on garbage.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F


class TrainingDiverged(RuntimeError):
    """A loss or model output stopped being finite."""


def _require_finite(value: torch.Tensor, label: str) -> torch.Tensor:
    if not bool(torch.isfinite(value).all()):
        raise TrainingDiverged(f"{label} is not finite")
    return value


def bce_term(g_out: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean binary cross entropy of generated probabilities vs a 0/1 target."""
    return F.binary_cross_entropy(g_out, target)


def generator_loss(
    critic_fake: torch.Tensor,
    g_out: torch.Tensor,
    target: torch.Tensor,
    bce_weight: float,
    adversarial_sign: float = 1.0,
) -> torch.Tensor:
    """Critic score on generated patches plus weighted cross entropy.

    `critic_fake` holds per-sample critic scores of the generated patches.
    With adversarial_sign +1.0 the mean score is minimized as the composite
    objective states it; -1.0 flips the term to the conventional direction.
    """
    if adversarial_sign not in (1.0, -1.0):
        raise ValueError(f"adversarial_sign must be +1.0 or -1.0, got {adversarial_sign}")
    _require_finite(g_out, "generator output")
    loss = adversarial_sign * critic_fake.mean() + bce_weight * bce_term(g_out, target)
    return _require_finite(loss, "generator loss")


def discriminator_loss(
    critic_real: torch.Tensor,
    critic_fake: torch.Tensor,
    penalty: torch.Tensor,
    gp_coefficient: float,
) -> torch.Tensor:
    """Real/fake critic score difference plus the weighted gradient penalty."""
    loss = -critic_real.mean() + critic_fake.mean() + gp_coefficient * penalty
    return _require_finite(loss, "discriminator loss")


def gradient_penalty(
    critic,
    real: torch.Tensor,
    fake: torch.Tensor,
    condition: torch.Tensor,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Mean squared distance of the critic's gradient norm from 1.

    Each sample is evaluated at a point drawn uniformly on the segment
    between its real and generated mask; the gradient is taken with respect
    to that interpolated mask.
    """
    if real.shape != fake.shape:
        raise ValueError(f"real {tuple(real.shape)} and fake {tuple(fake.shape)} shapes differ")
    mix = torch.rand(real.shape[0], 1, 1, 1, generator=generator, dtype=real.dtype)
    interpolated = (mix * real + (1.0 - mix) * fake.detach()).requires_grad_(True)
    scores = critic(interpolated, condition)
    grads = torch.autograd.grad(scores.sum(), interpolated, create_graph=True)[0]
    norms = grads.flatten(start_dim=1).norm(2, dim=1)
    penalty = ((norms - 1.0) ** 2).mean()
    return _require_finite(penalty, "gradient penalty")
