"""Toy-scale adversarial training for document patch enhancement.

Consumes the binarization pipeline's preprocess outputs (patch manifests
plus PNGs), trains one small generator per channel against a shared critic,
and exports enhanced patches through the same manifest contract so the
pipeline's external-enhancer stage can pick them up. The two packages share
files, never code.
"""

from .config import (
    DEFAULT_LEARNING_RATE,
    FULL_SCALE_LEARNING_RATE,
    TrainHyperparams,
    load_hyperparams,
    save_hyperparams,
)
from .data import (
    PATCH_STAGE_SCALES,
    TrainingSample,
    augment_global_stage,
    augment_patch_stage,
    find_reference_masks,
    gate_target,
    load_reference_mask,
    load_training_set,
    tile_mask,
)
from .losses import (
    TrainingDiverged,
    bce_term,
    discriminator_loss,
    generator_loss,
    gradient_penalty,
)
from .manifest_io import (
    CHANNEL_NAMES,
    COLOR_CHANNELS,
    MANIFEST_VERSION,
    GridGeometry,
    ManifestDoc,
    load_patch,
    read_patch_manifest,
    write_patch_manifest,
)
from .models import ToyDiscriminator, ToyGenerator, parameter_count
from .train import (
    TRAIN_CHANNELS,
    TrainResult,
    build_models,
    enhance_directory,
    enhance_manifest,
    fuse_probabilities,
    train,
)

__all__ = [
    "CHANNEL_NAMES",
    "COLOR_CHANNELS",
    "DEFAULT_LEARNING_RATE",
    "FULL_SCALE_LEARNING_RATE",
    "GridGeometry",
    "MANIFEST_VERSION",
    "ManifestDoc",
    "PATCH_STAGE_SCALES",
    "TRAIN_CHANNELS",
    "ToyDiscriminator",
    "ToyGenerator",
    "TrainHyperparams",
    "TrainResult",
    "TrainingDiverged",
    "TrainingSample",
    "augment_global_stage",
    "augment_patch_stage",
    "bce_term",
    "build_models",
    "discriminator_loss",
    "enhance_directory",
    "enhance_manifest",
    "find_reference_masks",
    "fuse_probabilities",
    "gate_target",
    "generator_loss",
    "gradient_penalty",
    "load_hyperparams",
    "load_patch",
    "load_reference_mask",
    "load_training_set",
    "parameter_count",
    "read_patch_manifest",
    "save_hyperparams",
    "tile_mask",
    "train",
    "write_patch_manifest",
]
