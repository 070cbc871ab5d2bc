"""Synthetic degraded document images with exact ground truth.

No scanned datasets ship with the package, so tests and the bundled
experiments generate documents with known text masks. The generator writes
dense stroke "text" over a parchment-toned background, then degrades the
page three ways:

* smooth illumination drift across the page,
* a subset of strokes printed in faded ink that sits *above* the global
  midpoint cut (invisible to fixed thresholding, recoverable by local
  mean-relative normalization),
* additive Gaussian sensor noise.

Strokes use dark-but-midtone ink, so doubling intensities (as a raw
un-normalized low-pass band does) pushes them past the midpoint cut. These
three failure modes separate the preprocessing variants the experiments
compare.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, ImageDraw

from .raster import resize_bicubic, save_raster

# Per-channel levels. Ink stays below the 127.5 midpoint in every channel
# (even under drift + 3-sigma noise); faded ink stays above it; background
# stays above the per-patch mean that normalization thresholds against.
BG_RGB = (210.0, 206.0, 202.0)
INK_RGB = (100.0, 96.0, 92.0)
FADED_RGB = (158.0, 154.0, 150.0)


def _stroke_mask(rng: np.random.Generator, width: int, height: int,
                 target_fraction: float, stroke_width_range=(3, 7)) -> np.ndarray:
    """Random line strokes on an empty page until coverage reaches the target."""
    img = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(img)
    total = width * height
    lo, hi = stroke_width_range
    for _ in range(4000):
        mask = np.asarray(img) > 0
        if np.count_nonzero(mask) >= target_fraction * total:
            break
        x0 = int(rng.integers(0, width))
        y0 = int(rng.integers(0, height))
        length = int(rng.integers(width // 8, width // 2))
        angle = rng.uniform(-0.35, 0.35) + (0.0 if rng.random() < 0.8 else np.pi / 2)
        x1 = int(np.clip(x0 + length * np.cos(angle), 0, width - 1))
        y1 = int(np.clip(y0 + length * np.sin(angle), 0, height - 1))
        draw.line([(x0, y0), (x1, y1)], fill=255, width=int(rng.integers(lo, hi + 1)))
    return np.asarray(img) > 0


def _illumination(rng: np.random.Generator, width: int, height: int, amplitude: float) -> np.ndarray:
    """Smooth low-frequency brightness field on [-amplitude, +amplitude]."""
    coarse = rng.uniform(-amplitude, amplitude, size=(3, 4))
    return resize_bicubic(coarse, width, height)


def synth_document(
    width: int = 448,
    height: int = 448,
    seed: int = 0,
    text_fraction: float = 0.15,
    faded_fraction: float = 0.09,
    drift_amplitude: float = 6.0,
    noise_sigma: float = 2.5,
) -> tuple:
    """One degraded color document; returns (uint8 (H, W, 3) raster, gt mask).

    `text_fraction` is the normal-ink coverage target and `faded_fraction`
    the faded-ink coverage target; the ground truth is their union, faded
    strokes included (they are real text a reader can see). The default size
    tiles cleanly at the default 224 patch size, so no patch degenerates to
    mostly replication padding (a nearly-constant patch has no usable local
    statistics; real pages are big enough that this rarely matters, synthetic
    ones must be sized for it).
    """
    rng = np.random.default_rng(seed)
    normal = _stroke_mask(rng, width, height, text_fraction, stroke_width_range=(5, 9))
    faded = _stroke_mask(rng, width, height, faded_fraction, stroke_width_range=(4, 8))
    faded &= ~normal
    gt = normal | faded

    drift = _illumination(rng, width, height, drift_amplitude)
    channels = []
    for k in range(3):
        plane = np.full((height, width), BG_RGB[k])
        plane[normal] = INK_RGB[k]
        plane[faded] = FADED_RGB[k]
        plane = plane + drift + rng.normal(0.0, noise_sigma, size=plane.shape)
        channels.append(plane)
    raster = np.rint(np.clip(np.stack(channels, axis=2), 0.0, 255.0)).astype(np.uint8)
    return raster, gt


def synth_noisy_text_patch(
    size: int = 64,
    seed: int = 0,
    text_fraction: float = 0.20,
    pepper_fraction: float = 0.09,
    salt_fraction: float = 0.04,
    bg_level: float = 230.0,
    ink_level: float = 15.0,
    pepper_level: float = 85.0,
    noise_sigma: float = 2.0,
) -> tuple:
    """A square patch of dark text over a salt-and-pepper background.

    Pepper speckles sit below the midpoint cut (false positives for direct
    thresholding); salt speckles saturate bright. Returns
    (uint8 (size, size) plane, gt mask). The text is heavy-stroke so the
    local mean stays well below the clean background level.
    """
    rng = np.random.default_rng(seed)
    gt = _stroke_mask(rng, size, size, text_fraction, stroke_width_range=(9, 12))

    plane = np.full((size, size), bg_level)
    noise_kind = rng.random(plane.shape)
    pepper = (noise_kind < pepper_fraction) & ~gt
    salt = (noise_kind >= pepper_fraction) & (noise_kind < pepper_fraction + salt_fraction) & ~gt
    plane[pepper] = pepper_level
    plane[salt] = 255.0
    plane[gt] = ink_level
    plane = plane + rng.normal(0.0, noise_sigma, size=plane.shape)
    return np.rint(np.clip(plane, 0.0, 255.0)).astype(np.uint8), gt


def write_dataset(
    root,
    count: int = 3,
    width: int = 448,
    height: int = 448,
    seed: int = 0,
    gray: bool = False,
    gt_suffix: str = "_gt",
) -> list:
    """Write `count` synthetic documents plus ground truths under `root`.

    Files are named doc0.png, doc0_gt.png, ... Ground truths are {0, 255}
    renderings (text black). With `gray=True` the documents are stored as
    single-channel luma. Returns the list of image paths.
    """
    os.makedirs(root, exist_ok=True)
    paths = []
    for i in range(count):
        raster, gt = synth_document(width=width, height=height, seed=seed + i)
        if gray:
            from .raster import luma, plane_to_raster

            raster = plane_to_raster(luma(raster))
        img_path = os.path.join(str(root), f"doc{i}.png")
        save_raster(img_path, raster)
        save_raster(os.path.join(str(root), f"doc{i}{gt_suffix}.png"), gt)
        paths.append(img_path)
    return paths
