"""Reader/writer for the patch-manifest file contract.

The binarization pipeline and this trainer talk only through files: a JSON
manifest describing one image's patch grid plus an 8-bit PNG per
(row, col, channel) patch, with paths relative to the manifest. This module
implements that contract directly from its documented shape; it shares no
code with the pipeline package, so either side can change internals as long
as the files stay compatible.

All writes are atomic (temp file + rename) so a crashed or concurrent run
never leaves a half-written manifest or patch behind.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

MANIFEST_VERSION = 1
CHANNEL_NAMES = ("gray", "red", "green", "blue", "rgb")
COLOR_CHANNELS = ("red", "green", "blue")


@dataclass(frozen=True)
class GridGeometry:
    """Patch-grid shape of one image: tile size, counts, padding, true dims."""

    patch_size: int
    rows: int
    cols: int
    pad_right: int
    pad_bottom: int
    original_width: int
    original_height: int

    def __post_init__(self):
        if self.patch_size < 1 or self.rows < 1 or self.cols < 1:
            raise ValueError("patch_size, rows, and cols must all be >= 1")
        if self.pad_right < 0 or self.pad_bottom < 0:
            raise ValueError("padding must be non-negative")
        if self.cols * self.patch_size != self.original_width + self.pad_right:
            raise ValueError("cols * patch_size must equal original_width + pad_right")
        if self.rows * self.patch_size != self.original_height + self.pad_bottom:
            raise ValueError("rows * patch_size must equal original_height + pad_bottom")


@dataclass(frozen=True)
class ManifestDoc:
    """One parsed manifest: image id, grid geometry, and patch file paths.

    `patches` maps (row, col, channel) to the PNG path relative to the
    manifest file's directory. Every channel present must cover the full
    grid, mirroring what the consuming pipeline enforces.
    """

    image_id: str
    geometry: GridGeometry
    patches: dict

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        for (row, col, channel), rel in self.patches.items():
            if channel not in CHANNEL_NAMES:
                raise ValueError(f"unknown channel {channel!r}, expected one of {CHANNEL_NAMES}")
            if not 0 <= row < self.geometry.rows or not 0 <= col < self.geometry.cols:
                raise ValueError(
                    f"patch ({row}, {col}) outside {self.geometry.rows}x{self.geometry.cols} grid"
                )
            if not rel or os.path.isabs(rel):
                raise ValueError(f"patch path must be relative and non-empty: {rel!r}")
        cells = self.geometry.rows * self.geometry.cols
        for channel in self.channels():
            have = sum(1 for (_, _, c) in self.patches if c == channel)
            if have != cells:
                raise ValueError(f"channel {channel!r} covers {have} of {cells} grid cells")

    def channels(self) -> tuple:
        present = {c for (_, _, c) in self.patches}
        return tuple(c for c in CHANNEL_NAMES if c in present)


def read_patch_manifest(path) -> ManifestDoc:
    """Parse and validate a manifest JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        version = doc.get("version", MANIFEST_VERSION)
        if version != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {version}")
        geometry = GridGeometry(
            patch_size=int(doc["patch_size"]),
            rows=int(doc["rows"]),
            cols=int(doc["cols"]),
            pad_right=int(doc["pad_right"]),
            pad_bottom=int(doc["pad_bottom"]),
            original_width=int(doc["original_width"]),
            original_height=int(doc["original_height"]),
        )
        patches = {}
        for entry in doc["patches"]:
            key = (int(entry["row"]), int(entry["col"]), str(entry["channel"]))
            if key in patches:
                raise ValueError(f"duplicate patch record for {key}")
            patches[key] = str(entry["path"])
        return ManifestDoc(image_id=str(doc["image_id"]), geometry=geometry, patches=patches)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc


def load_patch(manifest_path, rel_path: str) -> np.ndarray:
    """Load one patch PNG as float64, resolving its path against the manifest."""
    base = os.path.dirname(os.path.abspath(str(manifest_path)))
    with Image.open(os.path.join(base, rel_path)) as img:
        arr = np.asarray(img)
    return arr.astype(np.float64)


def _atomic_save_png(arr: np.ndarray, path: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    Image.fromarray(arr).save(tmp, format="PNG")
    os.replace(tmp, path)


def write_patch_manifest(out_dir, image_id: str, geometry: GridGeometry, patches: dict) -> str:
    """Write patch PNGs plus the manifest JSON; returns the manifest path.

    `patches` maps (row, col, channel) to uint8 arrays: (h, w) for the
    single-plane channels, (h, w, 3) for "rgb". Files land under
    `out_dir/image_id/` and the manifest at `out_dir/image_id.json`, the
    layout the pipeline's external-enhancer flag expects.
    """
    patch_dir = os.path.join(str(out_dir), image_id)
    os.makedirs(patch_dir, exist_ok=True)
    records = []
    rel_by_key = {}
    for (row, col, channel), arr in patches.items():
        arr = np.asarray(arr)
        if arr.dtype != np.uint8:
            raise ValueError(f"patch ({row}, {col}, {channel!r}) must be uint8, got {arr.dtype}")
        want_ndim = 3 if channel == "rgb" else 2
        if arr.ndim != want_ndim:
            raise ValueError(
                f"patch ({row}, {col}, {channel!r}) must have {want_ndim} dims, got {arr.ndim}"
            )
        rel = f"{image_id}/{channel}_r{row}c{col}.png"
        _atomic_save_png(arr, os.path.join(str(out_dir), rel))
        rel_by_key[(row, col, channel)] = rel
    # Emit records in a stable channel-major, row-major order.
    for channel in CHANNEL_NAMES:
        for row in range(geometry.rows):
            for col in range(geometry.cols):
                rel = rel_by_key.get((row, col, channel))
                if rel is not None:
                    records.append({"row": row, "col": col, "channel": channel, "path": rel})
    doc = ManifestDoc(image_id=image_id, geometry=geometry, patches=dict(rel_by_key))
    payload = {
        "version": MANIFEST_VERSION,
        "image_id": doc.image_id,
        "patch_size": geometry.patch_size,
        "rows": geometry.rows,
        "cols": geometry.cols,
        "pad_right": geometry.pad_right,
        "pad_bottom": geometry.pad_bottom,
        "original_width": geometry.original_width,
        "original_height": geometry.original_height,
        "patches": records,
    }
    manifest_path = os.path.join(str(out_dir), f"{image_id}.json")
    tmp = f"{manifest_path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, manifest_path)
    return manifest_path
