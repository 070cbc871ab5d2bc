"""Image containers, channel handling, bicubic resampling, and global thresholding.

Conventions used across the package:

* a *raster* is a ``uint8`` array of shape ``(H, W)`` (grayscale) or
  ``(H, W, 3)`` (RGB), as decoded from disk;
* a *plane* is a ``float64`` array of shape ``(H, W)`` holding intensities
  nominally on [0, 255] (intermediate values may leave that range);
* a *mask* is a ``bool`` array of shape ``(H, W)`` where True marks
  foreground, i.e. text. Dark pixels are text.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

# BT.601 luma weights, also used when collapsing RGB predictions to one plane.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SAVE_FORMATS = {".png": "PNG", ".bmp": "BMP", ".tif": "TIFF", ".tiff": "TIFF"}


@dataclass(frozen=True)
class ChannelBundle:
    """Float planes for one RGB raster: the three channels plus their luma."""

    gray: np.ndarray
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray

    def named(self):
        """Yield (name, plane) pairs, gray first."""
        yield "gray", self.gray
        yield "red", self.red
        yield "green", self.green
        yield "blue", self.blue


def _check_plane(plane: np.ndarray, name: str = "plane") -> np.ndarray:
    plane = np.asarray(plane)
    if plane.ndim != 2 or plane.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {plane.shape}")
    return plane.astype(np.float64, copy=False)


def _check_mask(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError(f"{name} must be a 2-D bool array, got {mask.dtype} shape {mask.shape}")
    return mask


def load_raster(path) -> np.ndarray:
    """Decode an image file to a uint8 raster, (H, W) or (H, W, 3).

    Palette and alpha variants are converted: anything with color content
    becomes RGB, single-channel content becomes grayscale.
    """
    with Image.open(path) as im:
        if im.mode in ("1", "L", "I", "I;16", "F"):
            im = im.convert("L")
        elif im.mode != "RGB":
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim not in (2, 3):
        raise ValueError(f"unsupported image layout in {path}: shape {arr.shape}")
    return arr


def save_raster(path, raster: np.ndarray) -> None:
    """Encode a uint8 raster (or a bool mask, written as 0/255) to disk."""
    raster = np.asarray(raster)
    if raster.dtype == np.bool_:
        raster = mask_to_raster(raster)
    if raster.dtype != np.uint8 or raster.ndim not in (2, 3):
        raise ValueError(f"expected a uint8 raster, got {raster.dtype} shape {raster.shape}")
    ext = os.path.splitext(str(path))[1].lower()
    fmt = _SAVE_FORMATS.get(ext)
    if fmt is None:
        raise ValueError(f"unsupported output format {ext!r} (use png, bmp, or tiff)")
    Image.fromarray(raster).save(path, format=fmt)


def as_plane(raster: np.ndarray) -> np.ndarray:
    """Raster or array-like to float64 plane; RGB input is reduced to luma."""
    arr = np.asarray(raster)
    if arr.ndim == 3:
        return luma(arr)
    return _check_plane(arr)


def luma(raster: np.ndarray) -> np.ndarray:
    """BT.601 weighted sum of an (H, W, 3) raster's channels, as float64."""
    arr = np.asarray(raster, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"luma needs an (H, W, 3) raster, got shape {arr.shape}")
    wr, wg, wb = LUMA_WEIGHTS
    return wr * arr[:, :, 0] + wg * arr[:, :, 1] + wb * arr[:, :, 2]


def split_channels(raster: np.ndarray) -> ChannelBundle:
    """Split an RGB raster into float64 planes for R, G, B plus BT.601 luma.

    Grayscale input is rejected: single-plane images take the gray-only path,
    they are not expanded into fake color channels.
    """
    arr = np.asarray(raster)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(
            f"split_channels needs an (H, W, 3) raster, got shape {arr.shape}; "
            "grayscale input goes through the single-plane path"
        )
    planes = arr.astype(np.float64)
    return ChannelBundle(
        gray=luma(arr),
        red=planes[:, :, 0],
        green=planes[:, :, 1],
        blue=planes[:, :, 2],
    )


def combine_channels(red: np.ndarray, green: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Stack three planes into an (H, W, 3) uint8 raster, clipping then rounding."""
    red = _check_plane(red, "red")
    green = _check_plane(green, "green")
    blue = _check_plane(blue, "blue")
    if not (red.shape == green.shape == blue.shape):
        raise ValueError(
            f"channel shapes differ: {red.shape}, {green.shape}, {blue.shape}"
        )
    stacked = np.stack([red, green, blue], axis=2)
    return np.rint(np.clip(stacked, 0.0, 255.0)).astype(np.uint8)


def plane_to_raster(plane: np.ndarray) -> np.ndarray:
    """Clip a plane to [0, 255] and round to uint8."""
    plane = _check_plane(plane)
    return np.rint(np.clip(plane, 0.0, 255.0)).astype(np.uint8)


def mask_to_raster(mask: np.ndarray) -> np.ndarray:
    """Render a mask as a uint8 plane: foreground (text) 0, background 255."""
    mask = _check_mask(mask)
    return np.where(mask, np.uint8(0), np.uint8(255))


def mask_from_raster(raster: np.ndarray) -> np.ndarray:
    """Read a stored binarization back to a mask: dark pixels are foreground.

    Accepts grayscale or RGB input (RGB is reduced to luma first) and cuts at
    the midpoint 127.5, so both {0, 255} renderings and antialiased scans of
    ground truth round-trip sensibly.
    """
    return binarize(as_plane(raster), 127.5)


def replicate_pad(arr: np.ndarray, right: int, bottom: int) -> np.ndarray:
    """Edge-replicate `arr` by `right` columns and `bottom` rows (2-D or 3-D)."""
    if right < 0 or bottom < 0:
        raise ValueError(f"pad amounts must be >= 0, got right={right} bottom={bottom}")
    if right == 0 and bottom == 0:
        return arr
    pad = [(0, bottom), (0, right)] + [(0, 0)] * (arr.ndim - 2)
    return np.pad(arr, pad, mode="edge")


def binarize(plane: np.ndarray, cutoff: float) -> np.ndarray:
    """Threshold a plane: True (foreground) where intensity < cutoff.

    `cutoff` is in intensity units on the plane's own scale, e.g. 127.5 for
    the midpoint of [0, 255]. The comparison is strict, so a pixel exactly at
    the cutoff lands in the background.
    """
    plane = _check_plane(plane)
    return plane < float(cutoff)


def otsu_threshold(plane: np.ndarray) -> int:
    """Between-class-variance-maximizing cut for a plane, as an intensity.

    The plane is histogrammed into 256 bins (values rounded and clipped to
    [0, 255]); the returned integer t partitions pixels into {x < t} and
    {x >= t}, matching `binarize`'s strict-less convention, so
    ``binarize(plane, otsu_threshold(plane))`` is the Otsu segmentation.

    Candidate cuts run over t in [1, 255]; ties break toward the smallest t.
    All variance comparisons are exact (integer arithmetic), so results are
    platform-independent. A plane whose histogram occupies a single bin has
    no between-class variance to speak of; its bin value is returned.
    """
    plane = _check_plane(plane)
    vals = np.rint(np.clip(plane, 0.0, 255.0)).astype(np.int64)
    hist = np.bincount(vals.ravel(), minlength=256)
    occupied = np.flatnonzero(hist)
    if occupied.size == 1:
        return int(occupied[0])

    counts = hist.tolist()
    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))

    # sigma_B^2(t) = (s0*c1 - s1*c0)^2 / (c0*c1) up to a constant factor;
    # compare as exact fractions num/den to dodge float ties.
    best_t = -1
    best_num = -1
    best_den = 1
    c0 = 0
    s0 = 0
    for t in range(1, 256):
        c0 += counts[t - 1]
        s0 += (t - 1) * counts[t - 1]
        c1 = total - c0
        if c0 == 0 or c1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * c1 - s1 * c0) ** 2
        den = c0 * c1
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def _cubic_weights(t: np.ndarray) -> np.ndarray:
    # Keys cubic convolution kernel, a = -0.5.
    at = np.abs(t)
    at2 = at * at
    at3 = at2 * at
    near = 1.5 * at3 - 2.5 * at2 + 1.0
    far = -0.5 * at3 + 2.5 * at2 - 4.0 * at + 2.0
    return np.where(at <= 1.0, near, np.where(at < 2.0, far, 0.0))


def _resample_taps(n_src: int, n_dst: int):
    """Tap indices (n_dst, 4) and normalized weights (n_dst, 4) for one axis.

    Output sample i reads source coordinate (i + 0.5) * n_src/n_dst - 0.5
    (centers aligned); taps outside the source are clamped to the edge.
    Weights are renormalized to sum exactly to 1 so constant inputs survive
    untouched and same-size resizes are identity.
    """
    coords = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    base = np.floor(coords).astype(np.int64)
    frac = coords - base
    offsets = np.arange(-1, 3, dtype=np.int64)
    weights = _cubic_weights(frac[:, None] - offsets[None, :])
    weights /= weights.sum(axis=1, keepdims=True)
    taps = np.clip(base[:, None] + offsets[None, :], 0, n_src - 1)
    return taps, weights


def resize_bicubic(plane: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Resample a plane to (new_height, new_width) with Keys bicubic, a=-0.5.

    Separable: columns first, then rows. Border taps replicate the edge
    sample. Resizing to the same size returns the values unchanged.
    """
    plane = _check_plane(plane)
    if new_width < 1 or new_height < 1:
        raise ValueError(f"target size must be >= 1, got {new_width}x{new_height}")
    h, w = plane.shape
    taps_x, weights_x = _resample_taps(w, new_width)
    tmp = np.einsum("hnk,nk->hn", plane[:, taps_x], weights_x)
    taps_y, weights_y = _resample_taps(h, new_height)
    return np.einsum("nkw,nk->nw", tmp[taps_y, :], weights_y)
