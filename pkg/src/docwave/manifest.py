"""Patch manifests: the file interface between this package and external enhancers.

A manifest is a JSON document describing one image's patch grid plus a PNG
file per (row, col, channel) patch. Downstream tools (e.g. a trained
enhancement model) read the stage-1 patches, write back enhanced patches
under the same coordinates, and the pipeline picks them up via the
"external" enhancer kind. Paths inside a manifest are relative to the
manifest file's directory, so a manifest directory can be moved wholesale.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .patching import PatchGrid
from .raster import load_raster, save_raster

# "rgb" tags a full-color patch (e.g. a whole-image model's output); the
# patch-stage enhancer only consumes the four single-plane tags.
CHANNEL_NAMES = ("gray", "red", "green", "blue", "rgb")

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class PatchRecord:
    """One stored patch: grid coordinates, channel tag, and a relative path."""

    row: int
    col: int
    channel: str
    path: str

    def __post_init__(self):
        if self.channel not in CHANNEL_NAMES:
            raise ValueError(
                f"unknown channel {self.channel!r}, expected one of {CHANNEL_NAMES}"
            )
        if self.row < 0 or self.col < 0:
            raise ValueError(f"negative patch coordinate ({self.row}, {self.col})")
        if not self.path or os.path.isabs(self.path):
            raise ValueError(f"patch path must be relative and non-empty: {self.path!r}")


@dataclass(frozen=True)
class PatchManifest:
    """Grid geometry plus the full set of patch records for one image."""

    image_id: str
    patch_size: int
    rows: int
    cols: int
    pad_right: int
    pad_bottom: int
    original_width: int
    original_height: int
    records: tuple

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        if self.patch_size < 1 or self.rows < 1 or self.cols < 1:
            raise ValueError("patch_size, rows, and cols must all be >= 1")
        if self.cols * self.patch_size != self.original_width + self.pad_right:
            raise ValueError("cols * patch_size must equal original_width + pad_right")
        if self.rows * self.patch_size != self.original_height + self.pad_bottom:
            raise ValueError("rows * patch_size must equal original_height + pad_bottom")
        seen = set()
        for rec in self.records:
            if rec.row >= self.rows or rec.col >= self.cols:
                raise ValueError(
                    f"record ({rec.row}, {rec.col}) outside {self.rows}x{self.cols} grid"
                )
            key = (rec.row, rec.col, rec.channel)
            if key in seen:
                raise ValueError(f"duplicate patch record for {key}")
            seen.add(key)
        # every channel present must cover the whole grid
        for channel in self.channels():
            have = {(r.row, r.col) for r in self.records if r.channel == channel}
            if len(have) != self.rows * self.cols:
                raise ValueError(
                    f"channel {channel!r} covers {len(have)} of "
                    f"{self.rows * self.cols} grid cells"
                )

    def channels(self) -> tuple:
        return tuple(c for c in CHANNEL_NAMES if any(r.channel == c for r in self.records))

    def record_at(self, row: int, col: int, channel: str) -> PatchRecord:
        for rec in self.records:
            if rec.row == row and rec.col == col and rec.channel == channel:
                return rec
        raise ValueError(f"manifest has no patch for (row={row}, col={col}, channel={channel!r})")

    def matches_grid(self, grid: PatchGrid) -> bool:
        return (
            self.patch_size == grid.patch_size
            and self.rows == grid.rows
            and self.cols == grid.cols
            and self.original_width == grid.original_width
            and self.original_height == grid.original_height
        )


def write_manifest(manifest: PatchManifest, path) -> None:
    """Serialize a manifest to JSON (stable key order, trailing newline)."""
    doc = {
        "version": MANIFEST_VERSION,
        "image_id": manifest.image_id,
        "patch_size": manifest.patch_size,
        "rows": manifest.rows,
        "cols": manifest.cols,
        "pad_right": manifest.pad_right,
        "pad_bottom": manifest.pad_bottom,
        "original_width": manifest.original_width,
        "original_height": manifest.original_height,
        "patches": [
            {"row": r.row, "col": r.col, "channel": r.channel, "path": r.path}
            for r in manifest.records
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> PatchManifest:
    """Parse and validate a manifest JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        version = doc.get("version", MANIFEST_VERSION)
        if version != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {version}")
        records = tuple(
            PatchRecord(
                row=int(p["row"]),
                col=int(p["col"]),
                channel=str(p["channel"]),
                path=str(p["path"]),
            )
            for p in doc["patches"]
        )
        return PatchManifest(
            image_id=str(doc["image_id"]),
            patch_size=int(doc["patch_size"]),
            rows=int(doc["rows"]),
            cols=int(doc["cols"]),
            pad_right=int(doc["pad_right"]),
            pad_bottom=int(doc["pad_bottom"]),
            original_width=int(doc["original_width"]),
            original_height=int(doc["original_height"]),
            records=records,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc


def export_grids(image_id: str, grids: dict, out_dir) -> PatchManifest:
    """Write per-channel patch grids as PNGs plus a manifest JSON.

    `grids` maps channel names to PatchGrid objects with identical geometry;
    patch planes are clipped/rounded to uint8 for storage. Files land under
    `out_dir/image_id/` and the manifest at `out_dir/image_id.json`.
    Returns the manifest.
    """
    if not grids:
        raise ValueError("export_grids needs at least one channel grid")
    for channel in grids:
        if channel not in CHANNEL_NAMES:
            raise ValueError(f"unknown channel {channel!r}")
    first = next(iter(grids.values()))
    for channel, grid in grids.items():
        if not grid.same_geometry(first):
            raise ValueError(f"grid for channel {channel!r} has mismatched geometry")

    patch_dir = os.path.join(str(out_dir), image_id)
    os.makedirs(patch_dir, exist_ok=True)
    records = []
    for channel in CHANNEL_NAMES:
        grid = grids.get(channel)
        if grid is None:
            continue
        for r in range(grid.rows):
            for c in range(grid.cols):
                rel = f"{image_id}/{channel}_r{r}c{c}.png"
                patch = np.asarray(grid.patch_at(r, c), dtype=np.float64)
                # Not plane_to_raster: "rgb" patches are (h, w, 3).
                quantized = np.clip(np.rint(patch), 0, 255).astype(np.uint8)
                save_raster(os.path.join(str(out_dir), rel), quantized)
                records.append(PatchRecord(row=r, col=c, channel=channel, path=rel))
    manifest = PatchManifest(
        image_id=image_id,
        patch_size=first.patch_size,
        rows=first.rows,
        cols=first.cols,
        pad_right=first.pad_right,
        pad_bottom=first.pad_bottom,
        original_width=first.original_width,
        original_height=first.original_height,
        records=tuple(records),
    )
    write_manifest(manifest, os.path.join(str(out_dir), f"{image_id}.json"))
    return manifest


def load_patch_plane(manifest_path, record: PatchRecord) -> np.ndarray:
    """Load one stored patch as a float64 plane, resolving its relative path."""
    base = os.path.dirname(os.path.abspath(str(manifest_path)))
    raster = load_raster(os.path.join(base, record.path))
    if raster.ndim != 2:
        raise ValueError(f"patch {record.path} is not single-channel")
    return raster.astype(np.float64)
