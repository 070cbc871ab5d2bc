"""Adversarial training loop and enhanced-patch export.

One critic is shared across channels and updated sequentially: each
iteration visits the channels in a fixed order, takes a critic step on that
channel's batch, then a step on that channel's generator. The luma channel
trains straight against the reference mask; color channels train against
their gated targets (see data.load_training_set).

After training, every stage-1 manifest can be re-emitted with generator
outputs in place of the stored patches, plus a fused full-color preview,
ready for the pipeline's external-enhancer stage.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .config import TrainHyperparams
from .data import TrainingSample
from .losses import TrainingDiverged, bce_term, discriminator_loss, generator_loss, gradient_penalty
from .manifest_io import COLOR_CHANNELS, load_patch, read_patch_manifest, write_patch_manifest
from .models import ToyDiscriminator, ToyGenerator

# Channel visiting order inside each iteration; luma last so its generator
# sees the freshest critic.
TRAIN_CHANNELS = ("red", "green", "blue", "gray")

CHECKPOINT_NAME = "diverged.pt"


@dataclass
class TrainResult:
    """Trained networks plus the loss traces the tests assert on."""

    generators: dict
    discriminator: ToyDiscriminator
    bce_history: list = field(default_factory=list)
    channel_bce: dict = field(default_factory=dict)
    final_generator_loss: dict = field(default_factory=dict)
    final_discriminator_loss: dict = field(default_factory=dict)
    steps: int = 0


def build_models(channels) -> tuple:
    """One generator per channel plus the shared critic (all single-plane)."""
    generators = {ch: ToyGenerator(in_channels=1) for ch in channels}
    return generators, ToyDiscriminator(condition_channels=1)


def _to_batch(samples) -> tuple:
    x = torch.from_numpy(np.stack([s.inputs for s in samples])[:, None, :, :])
    y = torch.from_numpy(np.stack([s.target for s in samples])[:, None, :, :])
    return x, y


def _channel_batches(samples, batch_size: int, rng: np.random.Generator) -> list:
    """Shape-homogeneous batches in a shuffled but seed-determined order."""
    by_shape = {}
    for s in samples:
        by_shape.setdefault(s.inputs.shape, []).append(s)
    batches = []
    for shape in sorted(by_shape):
        bucket = by_shape[shape]
        order = rng.permutation(len(bucket))
        for start in range(0, len(bucket), batch_size):
            batches.append([bucket[i] for i in order[start : start + batch_size]])
    return batches


def _write_checkpoint(checkpoint_dir, generators, discriminator, epoch: int, step: int) -> str:
    os.makedirs(str(checkpoint_dir), exist_ok=True)
    path = os.path.join(str(checkpoint_dir), CHECKPOINT_NAME)
    state = {
        "generators": {ch: g.state_dict() for ch, g in generators.items()},
        "discriminator": discriminator.state_dict(),
        "epoch": epoch,
        "step": step,
    }
    tmp = f"{path}.tmp-{os.getpid()}"
    torch.save(state, tmp)
    os.replace(tmp, path)
    return path


def train(samples, hp: TrainHyperparams, models=None, checkpoint_dir=None) -> TrainResult:
    """Run the per-channel adversarial loop over the sample list.

    `samples` is a list of data.TrainingSample; only channels present in it
    are trained, visited in TRAIN_CHANNELS order. `models` may inject a
    prebuilt (generators, discriminator) pair, e.g. to resume or to test
    failure handling; by default fresh networks are built after seeding.

    Raises TrainingDiverged on any non-finite loss, writing a checkpoint of
    the current weights first when `checkpoint_dir` is given.
    """
    if not samples:
        raise ValueError("training needs at least one sample")
    torch.manual_seed(hp.seed)
    torch.set_num_threads(1)
    per_channel = {}
    for s in samples:
        per_channel.setdefault(s.channel, []).append(s)
    channels = tuple(ch for ch in TRAIN_CHANNELS if ch in per_channel)
    if not channels:
        raise ValueError(f"no trainable channels among {sorted(per_channel)}")

    if models is None:
        generators, discriminator = build_models(channels)
    else:
        generators, discriminator = models
        missing = [ch for ch in channels if ch not in generators]
        if missing:
            raise ValueError(f"injected models lack generators for: {', '.join(missing)}")

    gen_opts = {
        ch: torch.optim.Adam(generators[ch].parameters(), lr=hp.learning_rate, betas=hp.adam_betas)
        for ch in channels
    }
    disc_opt = torch.optim.Adam(discriminator.parameters(), lr=hp.learning_rate, betas=hp.adam_betas)
    rng = np.random.default_rng(hp.seed)
    mix_rng = torch.Generator()
    mix_rng.manual_seed(hp.seed + 1)

    result = TrainResult(generators=generators, discriminator=discriminator)
    result.channel_bce = {ch: [] for ch in channels}
    try:
        for epoch in range(hp.epochs):
            batches = {ch: _channel_batches(per_channel[ch], hp.batch_size, rng) for ch in channels}
            steps = max(len(b) for b in batches.values())
            for step in range(steps):
                for ch in channels:
                    batch = batches[ch][step % len(batches[ch])]
                    x, y = _to_batch(batch)

                    fake = generators[ch](x).detach()
                    d_loss = discriminator_loss(
                        discriminator(y, x),
                        discriminator(fake, x),
                        gradient_penalty(discriminator, y, fake, x, generator=mix_rng),
                        hp.gp_coefficient,
                    )
                    disc_opt.zero_grad()
                    d_loss.backward()
                    disc_opt.step()

                    g_out = generators[ch](x)
                    g_loss = generator_loss(
                        discriminator(g_out, x), g_out, y, hp.bce_weight, hp.adversarial_sign
                    )
                    gen_opts[ch].zero_grad()
                    g_loss.backward()
                    gen_opts[ch].step()

                    bce = float(bce_term(g_out.detach(), y))
                    result.bce_history.append(bce)
                    result.channel_bce[ch].append(bce)
                    result.final_generator_loss[ch] = float(g_loss.detach())
                    result.final_discriminator_loss[ch] = float(d_loss.detach())
                    result.steps += 1
    except TrainingDiverged:
        if checkpoint_dir is not None:
            _write_checkpoint(checkpoint_dir, generators, discriminator, epoch, result.steps)
        raise
    return result


def fuse_probabilities(color: np.ndarray, luma: np.ndarray, omega: float) -> np.ndarray:
    """Blend a color channel's probabilities with the luma channel's.

    fused = omega * color + (1 - omega) * luma, clipped to [0, 1]. Identical
    inputs pass through unchanged for any omega.
    """
    if color.shape != luma.shape:
        raise ValueError(f"shapes differ: color {color.shape} vs luma {luma.shape}")
    return np.clip(omega * np.asarray(color) + (1.0 - omega) * np.asarray(luma), 0.0, 1.0)


def _probability_to_intensity(prob: np.ndarray) -> np.ndarray:
    """Map text probability to a dark-is-text intensity plane (uint8)."""
    plane = (1.0 - np.asarray(prob, dtype=np.float64)) * 255.0
    return np.clip(np.rint(plane), 0, 255).astype(np.uint8)


def _generate(generator: ToyGenerator, plane: np.ndarray) -> np.ndarray:
    x = torch.from_numpy((np.asarray(plane, dtype=np.float32) / 255.0)[None, None, :, :])
    with torch.no_grad():
        out = generator(x)
    return out[0, 0].numpy()


def enhance_manifest(generators: dict, hp: TrainHyperparams, manifest_path, out_dir) -> str:
    """Re-emit one stage-1 manifest with generator outputs as the patches.

    Every single-plane channel with a trained generator is replaced by that
    generator's output, mapped back to dark-is-text intensities. When all of
    red, green, blue, and gray are covered, a fused "rgb" preview is added:
    per color channel, omega blends its probabilities with the luma
    channel's, matching how the pipeline fuses the planes downstream.
    """
    doc = read_patch_manifest(manifest_path)
    probs = {}
    out_patches = {}
    for channel in doc.channels():
        if channel == "rgb" or channel not in generators:
            continue
        for row in range(doc.geometry.rows):
            for col in range(doc.geometry.cols):
                plane = load_patch(manifest_path, doc.patches[(row, col, channel)])
                prob = _generate(generators[channel], plane)
                probs[(row, col, channel)] = prob
                out_patches[(row, col, channel)] = _probability_to_intensity(prob)
    enhanced_channels = {c for (_, _, c) in out_patches}
    if {"gray", *COLOR_CHANNELS} <= enhanced_channels:
        for row in range(doc.geometry.rows):
            for col in range(doc.geometry.cols):
                fused = [
                    _probability_to_intensity(
                        fuse_probabilities(probs[(row, col, c)], probs[(row, col, "gray")], hp.omega)
                    )
                    for c in COLOR_CHANNELS
                ]
                out_patches[(row, col, "rgb")] = np.stack(fused, axis=-1)
    if not out_patches:
        raise ValueError(f"no generator covers any channel of {manifest_path}")
    return write_patch_manifest(out_dir, doc.image_id, doc.geometry, out_patches)


def enhance_directory(generators: dict, hp: TrainHyperparams, stage1_dir, out_dir) -> list:
    """enhance_manifest over every manifest in a directory; returns new paths."""
    manifest_paths = sorted(
        os.path.join(str(stage1_dir), name)
        for name in os.listdir(str(stage1_dir))
        if name.endswith(".json")
    )
    if not manifest_paths:
        raise ValueError(f"no manifests found under {stage1_dir}")
    return [enhance_manifest(generators, hp, path, out_dir) for path in manifest_paths]
