"""Tiling images into fixed-size square patches and lossless reassembly.

Images whose dimensions are not multiples of the patch size are
edge-replicated on the right and bottom up to the next multiple; the original
size is recorded so reassembly can crop the padding back off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import replicate_pad


@dataclass(frozen=True)
class PatchGrid:
    """A tiled image: geometry plus the patches themselves, row-major.

    `patches` is a tuple of read-only arrays, each of shape
    (patch_size, patch_size) or (patch_size, patch_size, C). Instances are
    immutable after construction; build modified grids with `with_patches`.
    """

    patch_size: int
    rows: int
    cols: int
    pad_right: int
    pad_bottom: int
    original_width: int
    original_height: int
    patches: tuple

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError(f"patch_size must be >= 1, got {self.patch_size}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not (0 <= self.pad_right < self.patch_size) or not (0 <= self.pad_bottom < self.patch_size):
            raise ValueError(
                f"padding must lie in [0, patch_size), got "
                f"right={self.pad_right} bottom={self.pad_bottom} for size {self.patch_size}"
            )
        if self.cols * self.patch_size != self.original_width + self.pad_right:
            raise ValueError("cols * patch_size must equal original_width + pad_right")
        if self.rows * self.patch_size != self.original_height + self.pad_bottom:
            raise ValueError("rows * patch_size must equal original_height + pad_bottom")
        if len(self.patches) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} patches for a "
                f"{self.rows}x{self.cols} grid, got {len(self.patches)}"
            )
        first = self.patches[0]
        for i, p in enumerate(self.patches):
            if p.shape[:2] != (self.patch_size, self.patch_size):
                raise ValueError(
                    f"patch {i} has shape {p.shape}, expected "
                    f"({self.patch_size}, {self.patch_size}, ...)"
                )
            if p.ndim != first.ndim or p.shape != first.shape:
                raise ValueError(f"patch {i} shape {p.shape} differs from patch 0 {first.shape}")

    def patch_at(self, row: int, col: int) -> np.ndarray:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"patch ({row}, {col}) outside {self.rows}x{self.cols} grid")
        return self.patches[row * self.cols + col]

    def with_patches(self, patches) -> "PatchGrid":
        """Same geometry, new patch contents (e.g. after per-patch transforms)."""
        return PatchGrid(
            patch_size=self.patch_size,
            rows=self.rows,
            cols=self.cols,
            pad_right=self.pad_right,
            pad_bottom=self.pad_bottom,
            original_width=self.original_width,
            original_height=self.original_height,
            patches=tuple(_freeze(np.asarray(p)) for p in patches),
        )

    def same_geometry(self, other: "PatchGrid") -> bool:
        return (
            self.patch_size == other.patch_size
            and self.rows == other.rows
            and self.cols == other.cols
            and self.original_width == other.original_width
            and self.original_height == other.original_height
        )


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def split_patches(img: np.ndarray, patch_size: int) -> PatchGrid:
    """Tile an image (2-D plane/mask or 3-D raster) into square patches.

    The grid has ceil(H/patch_size) rows and ceil(W/patch_size) columns; the
    right/bottom shortfall is filled by edge replication. Patches are copies
    in row-major order, so mutating the input afterwards cannot alias them.
    """
    img = np.asarray(img)
    if img.ndim not in (2, 3) or img.size == 0:
        raise ValueError(f"expected a non-empty 2-D or 3-D array, got shape {img.shape}")
    if patch_size < 1:
        raise ValueError(f"patch_size must be >= 1, got {patch_size}")
    h, w = img.shape[:2]
    rows = -(-h // patch_size)
    cols = -(-w // patch_size)
    pad_bottom = rows * patch_size - h
    pad_right = cols * patch_size - w
    padded = replicate_pad(img, pad_right, pad_bottom)
    patches = []
    for r in range(rows):
        for c in range(cols):
            tile = padded[
                r * patch_size : (r + 1) * patch_size,
                c * patch_size : (c + 1) * patch_size,
            ]
            patches.append(_freeze(tile.copy()))
    return PatchGrid(
        patch_size=patch_size,
        rows=rows,
        cols=cols,
        pad_right=pad_right,
        pad_bottom=pad_bottom,
        original_width=w,
        original_height=h,
        patches=tuple(patches),
    )


def reassemble(grid: PatchGrid) -> np.ndarray:
    """Stitch a grid back into one array and crop off the replication padding.

    Exact inverse of `split_patches` for unmodified patches, any dtype.
    """
    rows = [
        np.concatenate(grid.patches[r * grid.cols : (r + 1) * grid.cols], axis=1)
        for r in range(grid.rows)
    ]
    full = np.concatenate(rows, axis=0)
    return full[: grid.original_height, : grid.original_width].copy()
