"""Training data: pairing stage-1 patches with per-channel targets.

The upstream pipeline's preprocess step leaves, per image, a manifest plus
one PNG per (row, col, channel) patch: the luma channel raw, the color
channels already contour-smoothed and normalized. This module pairs those
patches with the image's reference mask to build (input, target) samples:

 - the luma channel trains against the reference mask as-is;
 - each color channel trains against the mask gated by that channel, i.e.
   a pixel is a target only where the mask says text AND the stored channel
   plane is strictly darker than the gate threshold.

Inputs are scaled to [0, 1]; targets are {0, 1} float planes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from .manifest_io import COLOR_CHANNELS, load_patch, read_patch_manifest

IMAGE_EXTENSIONS = (".png", ".bmp", ".tif", ".tiff")

PATCH_STAGE_SCALES = (0.75, 1.0, 1.25, 1.5)


@dataclass(frozen=True)
class TrainingSample:
    """One training pair plus enough provenance to trace it back."""

    image_id: str
    row: int
    col: int
    channel: str
    inputs: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        if self.inputs.shape != self.target.shape:
            raise ValueError(
                f"inputs {self.inputs.shape} and target {self.target.shape} shapes differ"
            )


def load_reference_mask(path) -> np.ndarray:
    """Read a reference mask image: True where the pixel is dark (text)."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    return arr < 127.5


def gate_target(plane: np.ndarray, mask: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Reference mask restricted to where the channel plane is dark enough.

    A pixel stays foreground only if the mask marks it as text and the plane
    value is strictly below threshold * 255. Mirrors how the pipeline derives
    channel-specific targets from one shared mask.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.shape != mask.shape:
        raise ValueError(f"shapes differ: plane {plane.shape} vs mask {mask.shape}")
    return mask & (plane < threshold * 255.0)


def tile_mask(mask: np.ndarray, geometry) -> np.ndarray:
    """Cut a mask into the manifest's patch grid, edge-padding the margins.

    Returns a (rows, cols, patch_size, patch_size) boolean array.
    """
    if mask.shape != (geometry.original_height, geometry.original_width):
        raise ValueError(
            f"mask shape {mask.shape} does not match manifest dims "
            f"({geometry.original_height}, {geometry.original_width})"
        )
    padded = np.pad(mask, ((0, geometry.pad_bottom), (0, geometry.pad_right)), mode="edge")
    s = geometry.patch_size
    tiles = np.empty((geometry.rows, geometry.cols, s, s), dtype=bool)
    for r in range(geometry.rows):
        for c in range(geometry.cols):
            tiles[r, c] = padded[r * s : (r + 1) * s, c * s : (c + 1) * s]
    return tiles


def find_reference_masks(data_root, gt_suffix: str = "_gt") -> dict:
    """Map flattened image ids to reference mask paths under a dataset root.

    Ids match the preprocess output naming: the path relative to the root,
    extension dropped, path separators flattened to "__", suffix stripped.
    """
    masks = {}
    for dirpath, _, filenames in os.walk(str(data_root)):
        for name in sorted(filenames):
            stem, ext = os.path.splitext(name)
            if ext.lower() not in IMAGE_EXTENSIONS or not stem.endswith(gt_suffix):
                continue
            rel = os.path.relpath(os.path.join(dirpath, name), str(data_root))
            rel_stem = os.path.splitext(rel)[0].replace(os.sep, "__")
            image_id = rel_stem[: -len(gt_suffix)]
            masks[image_id] = os.path.join(dirpath, name)
    return masks


def load_training_set(stage1_dir, data_root, gt_suffix: str = "_gt", gate_threshold: float = 0.5) -> list:
    """Build samples from every manifest in a preprocess output directory.

    Each manifest needs a matching reference mask (by flattened id) under
    `data_root`. Sample order is deterministic: sorted by image id, then
    channel name, then grid position.
    """
    manifest_paths = sorted(
        os.path.join(str(stage1_dir), name)
        for name in os.listdir(str(stage1_dir))
        if name.endswith(".json")
    )
    if not manifest_paths:
        raise ValueError(f"no manifests found under {stage1_dir}")
    masks = find_reference_masks(data_root, gt_suffix)
    samples = []
    for manifest_path in manifest_paths:
        doc = read_patch_manifest(manifest_path)
        mask_path = masks.get(doc.image_id)
        if mask_path is None:
            raise ValueError(f"no reference mask for image {doc.image_id!r} under {data_root}")
        tiles = tile_mask(load_reference_mask(mask_path), doc.geometry)
        for channel in doc.channels():
            if channel == "rgb":
                continue
            for row in range(doc.geometry.rows):
                for col in range(doc.geometry.cols):
                    plane = load_patch(manifest_path, doc.patches[(row, col, channel)])
                    gt_tile = tiles[row, col]
                    if channel in COLOR_CHANNELS:
                        target = gate_target(plane, gt_tile, gate_threshold)
                    else:
                        target = gt_tile
                    samples.append(
                        TrainingSample(
                            image_id=doc.image_id,
                            row=row,
                            col=col,
                            channel=channel,
                            inputs=(plane / 255.0).astype(np.float32),
                            target=target.astype(np.float32),
                        )
                    )
    samples.sort(key=lambda s: (s.image_id, s.channel, s.row, s.col))
    return samples


def _resize(arr: np.ndarray, factor: float, binary: bool) -> np.ndarray:
    h = int(round(arr.shape[0] * factor))
    w = int(round(arr.shape[1] * factor))
    img = Image.fromarray(np.asarray(arr, dtype=np.float32), mode="F")
    resample = Image.Resampling.NEAREST if binary else Image.Resampling.BICUBIC
    out = np.asarray(img.resize((w, h), resample=resample), dtype=np.float32)
    if binary:
        return (out > 0.5).astype(np.float32)
    return np.clip(out, 0.0, 1.0)


def _transformed(sample: TrainingSample, fn) -> TrainingSample:
    return replace(
        sample,
        inputs=np.ascontiguousarray(fn(sample.inputs)),
        target=np.ascontiguousarray(fn(sample.target)),
    )


def _scaled(sample: TrainingSample, factor: float) -> TrainingSample:
    if factor == 1.0:
        return sample
    return replace(
        sample,
        inputs=_resize(sample.inputs, factor, binary=False),
        target=_resize(sample.target, factor, binary=True),
    )


def augment_patch_stage(samples: list) -> list:
    """Patch-model augmentation: four scales, each as-is and rotated 270 degrees.

    Every source sample yields 8 variants; the same transform is applied to
    the input and its target.
    """
    out = []
    for sample in samples:
        for factor in PATCH_STAGE_SCALES:
            scaled = _scaled(sample, factor)
            out.append(scaled)
            out.append(_transformed(scaled, lambda a: np.rot90(a, k=3)))
    return out


def augment_global_stage(samples: list) -> list:
    """Whole-image-model augmentation: scales without rotation, plus rotations and flips.

    Every source sample yields 9 variants: the four scales unrotated, then
    90/180/270 degree rotations and horizontal/vertical flips at native scale.
    """
    out = []
    for sample in samples:
        for factor in PATCH_STAGE_SCALES:
            out.append(_scaled(sample, factor))
        for k in (1, 2, 3):
            out.append(_transformed(sample, lambda a, k=k: np.rot90(a, k=k)))
        out.append(_transformed(sample, np.fliplr))
        out.append(_transformed(sample, np.flipud))
    return out
