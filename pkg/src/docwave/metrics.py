"""Binarization quality metrics in the DIBCO style.

All metrics compare a predicted mask against a ground-truth mask (bool
arrays, True = foreground text). F-measure and pseudo-F-measure are reported
as percentages; PSNR is in dB over {0, 1} images (identical masks give
+inf); DRD is the per-block-normalized distortion where lower is better. The
composite score averages F-measure, pseudo-F-measure, PSNR, and (100 - DRD).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_erosion, distance_transform_cdt

from .raster import _check_mask


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel counts for one mask pair."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    """All per-image metrics; `avg` is None when PSNR is infinite."""

    fm: float
    pfm: float
    psnr: float
    drd: float
    avg: float | None
    counts: ConfusionCounts


def _check_pair(pred: np.ndarray, gt: np.ndarray):
    pred = _check_mask(pred, "pred")
    gt = _check_mask(gt, "gt")
    if pred.shape != gt.shape:
        raise ValueError(f"mask shapes differ: pred {pred.shape} vs gt {gt.shape}")
    if pred.size == 0:
        raise ValueError("masks must be non-empty")
    return pred, gt


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Count TP/FP/FN/TN between predicted and ground-truth foreground."""
    pred, gt = _check_pair(pred, gt)
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = pred.size - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def f_measure(counts: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall, as a percentage.

    Degenerate cases: no predicted foreground means precision 0, no true
    foreground means recall 0; when both precision and recall are 0 the
    F-measure is 0.
    """
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * precision * recall / (precision + recall)


def _distance_to(targets: np.ndarray) -> np.ndarray:
    """Chebyshev distance from every pixel to the nearest True pixel."""
    # distance_transform_cdt measures nonzero pixels' distance to the nearest
    # zero, so feed it the complement.
    return distance_transform_cdt(~targets, metric="chessboard").astype(np.float64)


def gt_contour(gt: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one 8-connected background neighbor.

    Pixels beyond the image border do not count as background, so a
    foreground region flush against the border has no contour there.
    """
    gt = _check_mask(gt, "gt")
    interior = binary_erosion(gt, structure=np.ones((3, 3), dtype=bool), border_value=1)
    return gt & ~interior


def pseudo_f_measure(pred: np.ndarray, gt: np.ndarray, weighted: bool = True) -> float:
    """Distance-weighted F-measure, as a percentage.

    Recall weights fall off with Chebyshev distance from the ground-truth
    contour (w = 1/(1+d)): missing a stroke core costs less than missing its
    outline. False positives are penalized by how far they sit from any true
    foreground (weight d/(1+d)): a smudge next to a stroke is cheaper than
    one in blank space. With `weighted=False` both weightings are uniform and
    the result equals `f_measure` exactly.

    Raises if the ground truth has no foreground at all (recall undefined).
    """
    pred, gt = _check_pair(pred, gt)
    if not gt.any():
        raise ValueError("pseudo_f_measure undefined: ground truth has no foreground")

    if not weighted:
        recall_w = np.ones(gt.shape)
        fp_w = np.ones(gt.shape)
    else:
        contour = gt_contour(gt)
        if contour.any():
            recall_w = 1.0 / (1.0 + _distance_to(contour))
        else:
            # all-foreground ground truth has no contour; fall back to uniform
            recall_w = np.ones(gt.shape)
        dist_fg = _distance_to(gt)
        fp_w = dist_fg / (1.0 + dist_fg)

    recall_num = float(recall_w[gt & pred].sum())
    recall_den = float(recall_w[gt].sum())
    p_recall = recall_num / recall_den

    tp = float(np.count_nonzero(pred & gt))
    fp_pen = float(fp_w[pred & ~gt].sum())
    p_precision = tp / (tp + fp_pen) if tp + fp_pen > 0.0 else 0.0

    if p_precision + p_recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * p_precision * p_recall / (p_precision + p_recall)


def psnr(pred: np.ndarray, gt: np.ndarray) -> float:
    """Peak signal-to-noise ratio between two masks embedded as {0, 1} images.

    With peak value 1, PSNR = -10*log10(fraction of differing pixels).
    Identical masks return +inf; callers serializing reports must handle it.
    """
    pred, gt = _check_pair(pred, gt)
    mismatched = int(np.count_nonzero(pred != gt))
    if mismatched == 0:
        return math.inf
    return -10.0 * math.log10(mismatched / pred.size)


def nubn(gt: np.ndarray) -> int:
    """Number of non-uniform 8x8 blocks in the ground truth.

    The grid is anchored at (0, 0); partial blocks at the right/bottom
    borders count too. A block is non-uniform when it contains both
    foreground and background pixels.
    """
    gt = _check_mask(gt, "gt")
    if gt.size == 0:
        raise ValueError("ground truth must be non-empty")
    h, w = gt.shape
    row_starts = np.arange(0, h, 8)
    col_starts = np.arange(0, w, 8)
    sums = np.add.reduceat(np.add.reduceat(gt.astype(np.int64), row_starts, axis=0),
                           col_starts, axis=1)
    row_sizes = np.minimum(row_starts + 8, h) - row_starts
    col_sizes = np.minimum(col_starts + 8, w) - col_starts
    areas = row_sizes[:, None] * col_sizes[None, :]
    return int(np.count_nonzero((sums > 0) & (sums < areas)))


# Raw DRD neighborhood weights: 1/sqrt(i^2+j^2) on a 5x5 lattice centered at
# the flipped pixel, 0 at the center. Their sum, before normalization:
_RAW_WEIGHT_SUM_REFERENCE = 13.8203494

def drd_weight_matrix() -> np.ndarray:
    """The normalized 5x5 DRD weight matrix (sums to 1, center 0)."""
    ii, jj = np.meshgrid(np.arange(-2, 3), np.arange(-2, 3), indexing="ij")
    dist = np.sqrt(ii.astype(np.float64) ** 2 + jj.astype(np.float64) ** 2)
    raw = np.zeros((5, 5))
    nonzero = dist > 0
    raw[nonzero] = 1.0 / dist[nonzero]
    return raw / raw.sum()


def drd(pred: np.ndarray, gt: np.ndarray) -> float:
    """Distance-reciprocal distortion: mean visual damage per non-uniform block.

    Every flipped pixel accumulates the weighted disagreement between its
    prediction value and the ground truth's 5x5 neighborhood (edge-replicated
    at borders); the total is divided by the ground truth's non-uniform block
    count. Identical masks give 0 even when that count is 0; otherwise a
    uniform ground truth (NUBN = 0) leaves the metric undefined and raises.
    """
    pred, gt = _check_pair(pred, gt)
    flipped = pred != gt
    if not flipped.any():
        return 0.0
    blocks = nubn(gt)
    if blocks == 0:
        raise ValueError("drd undefined: ground truth has no non-uniform 8x8 blocks")
    weights = drd_weight_matrix()
    gt_pad = np.pad(gt.astype(np.float64), 2, mode="edge")
    ys, xs = np.nonzero(flipped)
    pred_vals = pred[ys, xs].astype(np.float64)
    total = 0.0
    for i in range(5):
        for j in range(5):
            w = weights[i, j]
            if w == 0.0:
                continue
            total += w * float(np.abs(gt_pad[ys + i, xs + j] - pred_vals).sum())
    return total / blocks


def avg_score(fm: float, pfm: float, psnr_db: float, drd_value: float) -> float:
    """Composite quality score: (FM + pFM + PSNR + (100 - DRD)) / 4.

    Higher is better for every term (DRD enters inverted). Undefined for
    non-finite PSNR: a perfect prediction has no finite composite score.
    """
    if not math.isfinite(psnr_db):
        raise ValueError("avg_score undefined for non-finite psnr")
    return (fm + pfm + psnr_db + (100.0 - drd_value)) / 4.0


def evaluate(pred: np.ndarray, gt: np.ndarray, weighted_pfm: bool = True) -> MetricsReport:
    """All metrics for one mask pair, with `avg` withheld when PSNR is inf."""
    pred, gt = _check_pair(pred, gt)
    counts = confusion(pred, gt)
    fm = f_measure(counts)
    pfm = pseudo_f_measure(pred, gt, weighted=weighted_pfm)
    p = psnr(pred, gt)
    d = drd(pred, gt)
    avg = avg_score(fm, pfm, p, d) if math.isfinite(p) else None
    return MetricsReport(fm=fm, pfm=pfm, psnr=p, drd=d, avg=avg, counts=counts)


def mean_report(reports) -> dict:
    """Arithmetic means of the five metrics over per-image reports.

    Mirrors the per-dataset mean rows of a results table. If any image has
    infinite PSNR the mean PSNR is infinite and the mean avg is None;
    otherwise each entry is the plain mean of the per-image values.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("mean_report needs at least one report")
    n = len(reports)
    mean_psnr = (
        math.inf
        if any(math.isinf(r.psnr) for r in reports)
        else sum(r.psnr for r in reports) / n
    )
    mean_avg = (
        None
        if any(r.avg is None for r in reports)
        else sum(r.avg for r in reports) / n
    )
    return {
        "fm": sum(r.fm for r in reports) / n,
        "pfm": sum(r.pfm for r in reports) / n,
        "psnr": mean_psnr,
        "drd": sum(r.drd for r in reports) / n,
        "avg": mean_avg,
    }
