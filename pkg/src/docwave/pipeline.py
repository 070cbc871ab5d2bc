"""The three-stage binarization pipeline.

Stage 1 tiles the input into patches and, for color input, runs each color
channel's patches through the low-pass + sigmoid-normalize transform (the
luma channel passes through untouched, as does everything for grayscale
input). Stage 2 applies a pluggable per-channel patch enhancer and fuses
each enhanced color channel with the enhanced luma. Stage 3 reassembles the
fused channels into a full-resolution prediction, runs a full-image branch
on it and another on a downscaled square copy of the original, blends the
two, and thresholds the blend into the final text mask.

Every step is deterministic: same input and config, same mask.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .manifest import PatchManifest, load_patch_plane, read_manifest
from .patching import PatchGrid, reassemble, split_patches
from .raster import (
    as_plane,
    binarize,
    combine_channels,
    luma,
    otsu_threshold,
    plane_to_raster,
    resize_bicubic,
    save_raster,
    split_channels,
)
from .wavelet import lowpass_normalize

ENHANCER_KINDS = ("identity", "wavelet", "external")


@dataclass(frozen=True)
class Enhancer:
    """A patch (or whole-plane) enhancement stage.

    kind "identity" passes planes through; "wavelet" reapplies the low-pass +
    normalize transform followed by per-patch Otsu, rendering the result as a
    {0, 255} plane (a self-contained baseline needing no trained model);
    "external" substitutes patches produced out-of-band, addressed through a
    manifest file.
    """

    kind: str = "identity"
    manifest_path: str | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ENHANCER_KINDS:
            raise ValueError(f"unknown enhancer kind {self.kind!r}, expected one of {ENHANCER_KINDS}")
        if self.kind == "external" and not self.manifest_path:
            raise ValueError("external enhancer needs a manifest_path")
        if self.kind != "external" and self.manifest_path:
            raise ValueError(f"manifest_path is only meaningful for kind='external', got kind={self.kind!r}")


@dataclass(frozen=True)
class FusionWeights:
    """Blend weights: color-vs-luma at stage 2, local-vs-global at stage 3.

    omega is the weight of the color channel's own signal against the luma
    channel's; local_weight is the weight of the full-resolution branch
    against the upsampled global branch. Both default to an even split.
    """

    omega: float = 0.5
    local_weight: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.omega <= 1.0):
            raise ValueError(f"omega must be in [0, 1], got {self.omega}")
        if not (0.0 <= self.local_weight <= 1.0):
            raise ValueError(f"local_weight must be in [0, 1], got {self.local_weight}")


@dataclass(frozen=True)
class RunConfig:
    """Everything that parameterizes one pipeline run."""

    patch_size: int = 224
    global_size: int = 512
    weights: FusionWeights = field(default_factory=FusionWeights)
    threshold: float = 0.5
    stage2: Enhancer = field(default_factory=Enhancer)
    stage3_local: Enhancer = field(default_factory=Enhancer)
    stage3_global: Enhancer = field(default_factory=Enhancer)
    norm_alpha: float | None = None
    norm_beta: float | None = None
    debug_dir: str | None = None

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError(f"patch_size must be >= 1, got {self.patch_size}")
        if self.global_size < 1:
            raise ValueError(f"global_size must be >= 1, got {self.global_size}")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        for name in ("stage3_local", "stage3_global"):
            if getattr(self, name).kind == "external":
                raise ValueError(
                    f"{name} cannot be 'external': manifests address patches, "
                    "and the whole-image branches have no patch grid"
                )


@dataclass(frozen=True)
class Stage1Result:
    """Per-channel patch grids sharing one geometry; gray is always present."""

    channels: dict

    @property
    def is_color(self) -> bool:
        return "red" in self.channels

    @property
    def geometry(self) -> PatchGrid:
        return self.channels["gray"]


def channel_groundtruth(plane: np.ndarray, gt: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Per-channel training target: the ground truth gated by the channel.

    A pixel is foreground only where the reference mask says text *and* the
    channel plane is dark enough (strictly below threshold*255). Background
    stays background regardless of the plane. Used to derive channel-specific
    targets from one shared ground truth.
    """
    plane = as_plane(plane)
    if gt.shape != plane.shape:
        raise ValueError(f"shapes differ: plane {plane.shape} vs gt {gt.shape}")
    return gt & binarize(plane, threshold * 255.0)


def fuse_channels(color_out: np.ndarray, gray_out: np.ndarray, weights: FusionWeights) -> np.ndarray:
    """Blend one color channel's output with the luma channel's.

    fused = omega * color + (1 - omega) * gray, clipped to [0, 255]. With
    omega 1 the color signal passes through alone; with omega 0 the luma
    signal does.
    """
    color_out = as_plane(color_out)
    gray_out = as_plane(gray_out)
    if color_out.shape != gray_out.shape:
        raise ValueError(f"shapes differ: color {color_out.shape} vs gray {gray_out.shape}")
    fused = weights.omega * color_out + (1.0 - weights.omega) * gray_out
    return np.clip(fused, 0.0, 255.0)


def assemble_color_prediction(red: np.ndarray, green: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Stack three fused channel planes into the 24-bit stage-3 local input."""
    return combine_channels(red, green, blue)


def fuse_local_global(
    local_plane: np.ndarray,
    global_plane: np.ndarray,
    out_width: int,
    out_height: int,
    weights: FusionWeights,
    threshold: float = 0.5,
) -> np.ndarray:
    """Blend the full-resolution branch with the upsampled global branch and cut.

    The local branch must already be (out_height, out_width); the global
    branch (any size) is bicubically resampled to match. The blend
    local_weight*local + (1-local_weight)*global is thresholded at
    threshold*255, strict-less, dark is text; a pixel blending to exactly the
    cut lands in the background.
    """
    local_plane = as_plane(local_plane)
    global_plane = as_plane(global_plane)
    if local_plane.shape != (out_height, out_width):
        raise ValueError(
            f"local branch is {local_plane.shape}, expected ({out_height}, {out_width})"
        )
    if global_plane.shape != (out_height, out_width):
        global_plane = resize_bicubic(global_plane, out_width, out_height)
    blended = weights.local_weight * local_plane + (1.0 - weights.local_weight) * global_plane
    return binarize(blended, threshold * 255.0)


def prepare_channels(
    img: np.ndarray,
    patch_size: int,
    alpha: float | None = None,
    beta: float | None = None,
) -> Stage1Result:
    """Stage 1: tile and per-channel preprocess an input raster.

    Color input yields four grids (gray passes through raw; red/green/blue go
    through the low-pass + normalize transform patch by patch). Grayscale
    input yields just the raw gray grid. All grids share the tiling geometry
    of the input.
    """
    img = np.asarray(img)
    grid = split_patches(img, patch_size)
    if img.ndim == 2:
        return Stage1Result(channels={"gray": grid.with_patches(
            [np.asarray(p, dtype=np.float64) for p in grid.patches]
        )})

    bundles = [split_channels(p) for p in grid.patches]
    channels = {"gray": grid.with_patches([b.gray for b in bundles])}
    for name in ("red", "green", "blue"):
        channels[name] = grid.with_patches(
            [lowpass_normalize(getattr(b, name), alpha=alpha, beta=beta) for b in bundles]
        )
    return Stage1Result(channels=channels)


def _enhance_plane(plane: np.ndarray, enhancer: Enhancer) -> np.ndarray:
    if enhancer.kind == "identity":
        return np.asarray(plane, dtype=np.float64)
    if enhancer.kind == "wavelet":
        smoothed = lowpass_normalize(plane, alpha=enhancer.alpha, beta=enhancer.beta)
        # Quantize to the 8-bit scale Otsu histograms over, so the cut and the
        # compared values share a domain (a constant plane then comes out
        # one-sided background instead of straddling its own bin).
        quantized = np.rint(np.clip(smoothed, 0.0, 255.0))
        mask = binarize(quantized, otsu_threshold(quantized))
        return np.where(mask, 0.0, 255.0)
    raise ValueError(f"cannot apply enhancer kind {enhancer.kind!r} to a bare plane")


def apply_enhancer(grid: PatchGrid, enhancer: Enhancer, channel: str = "gray") -> PatchGrid:
    """Stage 2: run one channel's patch grid through an enhancer.

    identity returns the grid unchanged; wavelet re-runs the low-pass +
    normalize transform and Otsu-binarizes each patch (rendered {0, 255},
    dark is text); external loads the manifest at `enhancer.manifest_path`
    and substitutes its stored patch for every (row, col) of this channel.
    The manifest must match the grid's geometry and cover it completely.
    """
    if enhancer.kind == "identity":
        return grid
    if enhancer.kind == "wavelet":
        return grid.with_patches([_enhance_plane(p, enhancer) for p in grid.patches])

    manifest = read_manifest(enhancer.manifest_path)
    if not manifest.matches_grid(grid):
        raise ValueError(
            f"manifest {enhancer.manifest_path} geometry "
            f"({manifest.rows}x{manifest.cols}, size {manifest.patch_size}) "
            f"does not match the target grid ({grid.rows}x{grid.cols}, size {grid.patch_size})"
        )
    if channel not in manifest.channels():
        raise ValueError(
            f"manifest {enhancer.manifest_path} has no patches for channel {channel!r}"
        )
    patches = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            rec = manifest.record_at(r, c, channel)
            plane = load_patch_plane(enhancer.manifest_path, rec)
            if plane.shape != (grid.patch_size, grid.patch_size):
                raise ValueError(
                    f"patch {rec.path} has shape {plane.shape}, expected "
                    f"({grid.patch_size}, {grid.patch_size})"
                )
            patches.append(plane)
    return grid.with_patches(patches)


def _resize_raster(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bicubic resize of a uint8 raster (per channel), back to uint8."""
    img = np.asarray(img)
    if img.ndim == 2:
        return plane_to_raster(resize_bicubic(img.astype(np.float64), width, height))
    planes = [
        resize_bicubic(img[:, :, k].astype(np.float64), width, height) for k in range(img.shape[2])
    ]
    return combine_channels(*planes)


def _branch_plane(img: np.ndarray, enhancer: Enhancer) -> np.ndarray:
    """Reduce a branch input (raster or plane) to one enhanced plane."""
    arr = np.asarray(img)
    plane = luma(arr) if arr.ndim == 3 else arr.astype(np.float64)
    return _enhance_plane(plane, enhancer)


def run_pipeline(img: np.ndarray, config: RunConfig | None = None) -> np.ndarray:
    """Run the full three-stage pipeline on a raster; returns the text mask.

    With all-identity enhancers and matching sizes this reduces to midpoint
    thresholding of the preprocessed channels' blend, which is the
    self-contained baseline; plugging manifests or the wavelet enhancer into
    the stages upgrades individual steps without touching the rest.
    """
    config = config or RunConfig()
    img = np.asarray(img)
    if img.ndim not in (2, 3) or img.size == 0:
        raise ValueError(f"expected a non-empty raster, got shape {img.shape}")

    stage1 = prepare_channels(img, config.patch_size, config.norm_alpha, config.norm_beta)
    enhanced = {
        name: apply_enhancer(grid, config.stage2, channel=name)
        for name, grid in stage1.channels.items()
    }

    if stage1.is_color:
        gray_grid = enhanced["gray"]
        fused = {}
        for name in ("red", "green", "blue"):
            fused[name] = [
                fuse_channels(p, g, config.weights)
                for p, g in zip(enhanced[name].patches, gray_grid.patches)
            ]
        color_patches = [
            assemble_color_prediction(r, g, b)
            for r, g, b in zip(fused["red"], fused["green"], fused["blue"])
        ]
        local_input = reassemble(gray_grid.with_patches(color_patches))
    else:
        local_input = reassemble(enhanced["gray"])

    local_plane = _branch_plane(local_input, config.stage3_local)
    global_input = _resize_raster(img, config.global_size, config.global_size)
    global_plane = _branch_plane(global_input, config.stage3_global)

    h, w = img.shape[:2]
    mask = fuse_local_global(
        local_plane, global_plane, w, h, config.weights, config.threshold
    )

    if config.debug_dir:
        _dump_debug(config.debug_dir, stage1, enhanced, local_input, local_plane, global_plane, mask)
    return mask


def _dump_debug(out_dir, stage1, enhanced, local_input, local_plane, global_plane, mask):
    os.makedirs(out_dir, exist_ok=True)
    for name, grid in stage1.channels.items():
        for r in range(grid.rows):
            for c in range(grid.cols):
                save_raster(
                    os.path.join(out_dir, f"stage1_{name}_r{r}c{c}.png"),
                    plane_to_raster(np.asarray(grid.patch_at(r, c), dtype=np.float64)),
                )
    for name, grid in enhanced.items():
        for r in range(grid.rows):
            for c in range(grid.cols):
                save_raster(
                    os.path.join(out_dir, f"stage2_{name}_r{r}c{c}.png"),
                    plane_to_raster(np.asarray(grid.patch_at(r, c), dtype=np.float64)),
                )
    if local_input.ndim == 3:
        save_raster(os.path.join(out_dir, "stage3_local_input.png"), local_input)
    else:
        save_raster(os.path.join(out_dir, "stage3_local_input.png"), plane_to_raster(local_input))
    save_raster(os.path.join(out_dir, "stage3_local.png"), plane_to_raster(local_plane))
    save_raster(os.path.join(out_dir, "stage3_global.png"), plane_to_raster(global_plane))
    save_raster(os.path.join(out_dir, "final_mask.png"), mask)
