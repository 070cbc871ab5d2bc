"""Single-level 2-D Haar transform and sigmoid intensity normalization.

The forward transform uses the orthonormal Haar pair (low = sum/sqrt(2),
high = difference/sqrt(2)) applied separably, so energy is conserved and the
inverse reconstructs the input to machine precision. Subband names follow the
filter order (horizontal, vertical): LL, HL, LH, HH, each of shape
(H/2, W/2) for an (H, W) input with even dimensions.

The normalization maps a plane through a logistic curve centered at `beta`
with spread `alpha`, rescaled to an output range (default [0, 255]): values
far below the center saturate toward the low end, values far above toward the
high end, and the center maps to the midpoint. With the automatic parameters
(beta = mean, alpha = stddev) this recenters a low-pass band so that
midpoint thresholding separates below-mean from above-mean pixels.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .raster import _check_plane, plane_to_raster, resize_bicubic, save_raster

_SQRT2 = np.sqrt(2.0)

# Guard for near-constant planes: the spread parameter must stay positive.
MIN_ALPHA = 1e-6


@dataclass(frozen=True)
class SubbandSet:
    """The four half-resolution subbands of one decomposition level."""

    ll: np.ndarray
    hl: np.ndarray
    lh: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shape = self.ll.shape
        for name in ("ll", "hl", "lh", "hh"):
            band = getattr(self, name)
            if band.ndim != 2 or band.shape != shape:
                raise ValueError(
                    f"subband {name} has shape {band.shape}, expected {shape}"
                )

    def named(self):
        yield "ll", self.ll
        yield "hl", self.hl
        yield "lh", self.lh
        yield "hh", self.hh


@dataclass(frozen=True)
class NormParams:
    """Sigmoid normalization parameters: center, spread, and output range."""

    alpha: float
    beta: float
    out_min: float = 0.0
    out_max: float = 255.0

    def __post_init__(self):
        if not (self.alpha > 0.0 and np.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha}")
        if not np.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")
        if not (self.out_min < self.out_max):
            raise ValueError(
                f"output range is empty: out_min={self.out_min} out_max={self.out_max}"
            )


def dwt2_haar(plane: np.ndarray) -> SubbandSet:
    """One level of the separable orthonormal Haar transform.

    Both dimensions must be even; callers tile or pad first. Column pairs
    (2n, 2n+1) are combined horizontally, then row pairs vertically.
    """
    plane = _check_plane(plane)
    h, w = plane.shape
    if h % 2 or w % 2:
        raise ValueError(f"dwt2_haar needs even dimensions, got {h}x{w}")
    low = (plane[:, 0::2] + plane[:, 1::2]) / _SQRT2
    high = (plane[:, 0::2] - plane[:, 1::2]) / _SQRT2
    return SubbandSet(
        ll=(low[0::2] + low[1::2]) / _SQRT2,
        lh=(low[0::2] - low[1::2]) / _SQRT2,
        hl=(high[0::2] + high[1::2]) / _SQRT2,
        hh=(high[0::2] - high[1::2]) / _SQRT2,
    )


def idwt2_haar(subbands: SubbandSet) -> np.ndarray:
    """Invert `dwt2_haar`: (H/2, W/2) subbands back to the (H, W) plane."""
    def unmerge_rows(low, high):
        out = np.empty((2 * low.shape[0], low.shape[1]))
        out[0::2] = (low + high) / _SQRT2
        out[1::2] = (low - high) / _SQRT2
        return out

    low = unmerge_rows(subbands.ll, subbands.lh)
    high = unmerge_rows(subbands.hl, subbands.hh)
    out = np.empty((low.shape[0], 2 * low.shape[1]))
    out[:, 0::2] = (low + high) / _SQRT2
    out[:, 1::2] = (low - high) / _SQRT2
    return out


def auto_norm_params(
    plane: np.ndarray,
    alpha: float | None = None,
    beta: float | None = None,
    out_min: float = 0.0,
    out_max: float = 255.0,
) -> NormParams:
    """Fill unspecified normalization parameters from the plane's statistics.

    beta defaults to the mean, alpha to the standard deviation (floored at
    MIN_ALPHA so constant planes stay valid).
    """
    plane = _check_plane(plane)
    if beta is None:
        beta = float(plane.mean())
    if alpha is None:
        alpha = max(float(plane.std()), MIN_ALPHA)
    return NormParams(alpha=alpha, beta=beta, out_min=out_min, out_max=out_max)


def normalize_sigmoid(plane: np.ndarray, params: NormParams) -> np.ndarray:
    """Logistic remap of a plane into (out_min, out_max).

    out = (out_max - out_min) / (1 + exp(-(x - beta)/alpha)) + out_min.
    Strictly increasing in x; x = beta maps to the midpoint of the range.
    (Far into the tails the float result saturates at the range ends.)
    """
    plane = _check_plane(plane)
    z = (plane - params.beta) / params.alpha
    return (params.out_max - params.out_min) * expit(z) + params.out_min


def lowpass_normalize(
    plane: np.ndarray,
    alpha: float | None = None,
    beta: float | None = None,
) -> np.ndarray:
    """Low-pass a plane via the Haar LL band, sigmoid-normalize it against its
    own statistics, and resample back to the input size.

    This is the per-channel preprocessing step applied to each color patch:
    it suppresses high-frequency noise while recentring intensities so that
    midpoint thresholding tracks the local below-mean population. Output is a
    plane on (0, 255) with the input's exact shape. Odd-sized inputs are
    edge-replicated to even dimensions for the transform; the final resize
    always targets the original size.
    """
    plane = _check_plane(plane)
    h, w = plane.shape
    padded = plane
    if h % 2 or w % 2:
        pad = [(0, h % 2), (0, w % 2)]
        padded = np.pad(plane, pad, mode="edge")
    ll = dwt2_haar(padded).ll
    normed = normalize_sigmoid(ll, auto_norm_params(ll, alpha=alpha, beta=beta))
    return resize_bicubic(normed, w, h)


def lowpass_raw(plane: np.ndarray) -> np.ndarray:
    """The Haar LL band resampled back to input size, with no normalization.

    Baseline for ablation runs: LL coefficients of a [0, 255] plane live on
    [0, 510] (the low-pass gain is 2), so thresholds calibrated for intensity
    data misfire on them. Odd inputs are edge-replicated like in
    `lowpass_normalize`.
    """
    plane = _check_plane(plane)
    h, w = plane.shape
    padded = plane
    if h % 2 or w % 2:
        padded = np.pad(plane, [(0, h % 2), (0, w % 2)], mode="edge")
    return resize_bicubic(dwt2_haar(padded).ll, w, h)


def dump_subbands(subbands: SubbandSet, out_dir, prefix: str = "subband") -> list:
    """Write each subband as an 8-bit PNG for inspection, returning the paths.

    Each band is sigmoid-normalized against its own statistics so detail
    bands (zero-centered) and the LL band (offset, doubled gain) both land on
    a visible [0, 255] scale.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, band in subbands.named():
        rendered = normalize_sigmoid(band, auto_norm_params(band))
        path = os.path.join(str(out_dir), f"{prefix}_{name}.png")
        save_raster(path, plane_to_raster(rendered))
        paths.append(path)
    return paths
