"""Training hyperparameters and their JSON config file.

A single declarative JSON file mirrors the TrainHyperparams fields one to
one, so a run is fully described by (dataset, stage-1 patch directory,
config file). Unknown keys are rejected rather than ignored: a typo in a
config should fail loudly, not silently train with defaults.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

# Default step size keeps the toy setup stable; full-scale runs typically
# double it. Both are exposed so a config can pick either explicitly.
DEFAULT_LEARNING_RATE = 1e-4
FULL_SCALE_LEARNING_RATE = 2e-4


@dataclass(frozen=True)
class TrainHyperparams:
    """Everything the training loop needs beyond the data itself.

    omega            weight of the color branch when fusing a color channel's
                     generator output with the luma generator's output
                     (fused = omega * color + (1 - omega) * luma).
    gp_coefficient   multiplier on the unit-gradient-norm penalty in the
                     critic objective.
    bce_weight       multiplier on the per-pixel binary cross entropy term in
                     the generator objective.
    learning_rate    Adam step size, shared by both optimizers.
    adam_betas       Adam moment coefficients, shared by both optimizers.
    adversarial_sign +1.0 minimizes the critic's score on generated patches
                     exactly as the composite objective is stated; -1.0 flips
                     it to the conventional adversarial direction. Only these
                     two values are meaningful.
    gate_threshold   cutoff (fraction of the 255 intensity scale) below which
                     a channel pixel counts as dark when gating the reference
                     mask into per-channel targets.
    epochs           passes over the training set, per network.
    batch_size       patches per optimizer step.
    seed             seeds every RNG touched by a run (model init, batch
                     order, interpolation draws).
    """

    omega: float = 0.5
    gp_coefficient: float = 10.0
    bce_weight: float = 50.0
    learning_rate: float = DEFAULT_LEARNING_RATE
    adam_betas: tuple = (0.5, 0.999)
    adversarial_sign: float = 1.0
    gate_threshold: float = 0.5
    epochs: int = 1
    batch_size: int = 4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must be in [0, 1], got {self.omega}")
        if self.gp_coefficient <= 0:
            raise ValueError(f"gp_coefficient must be > 0, got {self.gp_coefficient}")
        if self.bce_weight <= 0:
            raise ValueError(f"bce_weight must be > 0, got {self.bce_weight}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        betas = tuple(float(b) for b in self.adam_betas)
        if len(betas) != 2 or not all(0.0 <= b < 1.0 for b in betas):
            raise ValueError(f"adam_betas must be two values in [0, 1), got {self.adam_betas}")
        object.__setattr__(self, "adam_betas", betas)
        if self.adversarial_sign not in (1.0, -1.0):
            raise ValueError(f"adversarial_sign must be +1.0 or -1.0, got {self.adversarial_sign}")
        if not 0.0 < self.gate_threshold < 1.0:
            raise ValueError(f"gate_threshold must be in (0, 1), got {self.gate_threshold}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def save_hyperparams(hp: TrainHyperparams, path) -> None:
    """Write a config file that load_hyperparams reads back identically."""
    doc = asdict(hp)
    doc["adam_betas"] = list(hp.adam_betas)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_hyperparams(path) -> TrainHyperparams:
    """Read a JSON config; every key must name a TrainHyperparams field."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"config {path} must be a JSON object")
    known = set(TrainHyperparams.__dataclass_fields__)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"config {path} has unknown keys: {', '.join(unknown)}")
    if "adam_betas" in doc:
        doc["adam_betas"] = tuple(doc["adam_betas"])
    return replace(TrainHyperparams(), **doc)
