"""Naive reference implementations used to cross-check the package.

Everything here is written as plain Python loops over scalars (with
fractions.Fraction where exactness matters), deliberately avoiding numpy
vectorization, scipy, and any code path shared with the package itself. A
bug would have to appear in both an implementation and its oracle, in the
same place, to slip through.

Inputs are converted to nested Python lists up front; the loops themselves
touch no numpy objects (scalar extraction dominates runtime otherwise).
"""

import math
from fractions import Fraction

import numpy as np


def _rows(arr):
    return np.asarray(arr).tolist()


def cubic_kernel(t: float) -> float:
    t = abs(t)
    if t <= 1.0:
        return 1.5 * t**3 - 2.5 * t * t + 1.0
    if t < 2.0:
        return -0.5 * t**3 + 2.5 * t * t - 4.0 * t + 2.0
    return 0.0


def bicubic_scalar(plane, new_w: int, new_h: int):
    """Direct 4x4-tap resampling, one output pixel at a time."""
    rows = _rows(plane)
    h, w = len(rows), len(rows[0])
    out = [[0.0] * new_w for _ in range(new_h)]
    offsets = (-1, 0, 1, 2)
    for oy in range(new_h):
        sy = (oy + 0.5) * h / new_h - 0.5
        by = math.floor(sy)
        wy = [cubic_kernel((sy - by) - o) for o in offsets]
        sw = sum(wy)
        wy = [v / sw for v in wy]
        for ox in range(new_w):
            sx = (ox + 0.5) * w / new_w - 0.5
            bx = math.floor(sx)
            wx = [cubic_kernel((sx - bx) - o) for o in offsets]
            swx = sum(wx)
            wx = [v / swx for v in wx]
            acc = 0.0
            for i, dy in enumerate(offsets):
                row = rows[min(max(by + dy, 0), h - 1)]
                for j, dx in enumerate(offsets):
                    acc += wy[i] * wx[j] * row[min(max(bx + dx, 0), w - 1)]
            out[oy][ox] = acc
    return out


def haar_scalar(plane):
    """Per-2x2-block Haar subbands from the closed-form block formulas."""
    rows = _rows(plane)
    h, w = len(rows), len(rows[0])
    ll = [[0.0] * (w // 2) for _ in range(h // 2)]
    hl = [[0.0] * (w // 2) for _ in range(h // 2)]
    lh = [[0.0] * (w // 2) for _ in range(h // 2)]
    hh = [[0.0] * (w // 2) for _ in range(h // 2)]
    for i in range(h // 2):
        top = rows[2 * i]
        bot = rows[2 * i + 1]
        for j in range(w // 2):
            a, b = top[2 * j], top[2 * j + 1]
            c, d = bot[2 * j], bot[2 * j + 1]
            ll[i][j] = (a + b + c + d) / 2.0
            hl[i][j] = (a - b + c - d) / 2.0
            lh[i][j] = (a + b - c - d) / 2.0
            hh[i][j] = (a - b - c + d) / 2.0
    return ll, hl, lh, hh


def otsu_scalar(plane) -> int:
    """Exhaustive 256-candidate threshold scan with exact Fraction variance."""
    hist = [0] * 256
    for row in _rows(plane):
        for v in row:
            q = round(v)
            hist[min(max(q, 0), 255)] += 1
    occupied = [v for v in range(256) if hist[v]]
    if len(occupied) == 1:
        return occupied[0]
    best_t = -1
    best = Fraction(-1)
    for t in range(1, 256):
        c0 = sum(hist[:t])
        c1 = sum(hist[t:])
        if c0 == 0 or c1 == 0:
            continue
        s0 = sum(v * hist[v] for v in range(t))
        s1 = sum(v * hist[v] for v in range(t, 256))
        var = Fraction(c0) * Fraction(c1) * (Fraction(s0, c0) - Fraction(s1, c1)) ** 2
        if var > best:
            best = var
            best_t = t
    return best_t


def confusion_scalar(pred, gt):
    tp = fp = fn = tn = 0
    for prow, grow in zip(_rows(pred), _rows(gt)):
        for p, g in zip(prow, grow):
            if p and g:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
            else:
                tn += 1
    return tp, fp, fn, tn


def f_measure_scalar(pred, gt) -> float:
    tp, fp, fn, _ = confusion_scalar(pred, gt)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * precision * recall / (precision + recall)


def psnr_scalar(pred, gt) -> float:
    wrong = 0
    total = 0
    for prow, grow in zip(_rows(pred), _rows(gt)):
        for p, g in zip(prow, grow):
            total += 1
            if p != g:
                wrong += 1
    if wrong == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / (wrong / total))


def nubn_scalar(gt) -> int:
    rows = _rows(gt)
    h, w = len(rows), len(rows[0])
    count = 0
    for by in range(0, h, 8):
        for bx in range(0, w, 8):
            fg = bg = 0
            for y in range(by, min(by + 8, h)):
                row = rows[y]
                for x in range(bx, min(bx + 8, w)):
                    if row[x]:
                        fg += 1
                    else:
                        bg += 1
            if fg and bg:
                count += 1
    return count


def drd_weights_scalar():
    raw = [[0.0] * 5 for _ in range(5)]
    total = 0.0
    for i in range(-2, 3):
        for j in range(-2, 3):
            if i == 0 and j == 0:
                continue
            raw[i + 2][j + 2] = 1.0 / math.sqrt(i * i + j * j)
            total += raw[i + 2][j + 2]
    return [[v / total for v in row] for row in raw], total


def drd_scalar(pred, gt) -> float:
    prows = _rows(pred)
    grows = _rows(gt)
    h, w = len(grows), len(grows[0])
    weights, _ = drd_weights_scalar()
    total = 0.0
    any_flip = False
    for y in range(h):
        prow = prows[y]
        grow = grows[y]
        for x in range(w):
            pv = 1.0 if prow[x] else 0.0
            gv = 1.0 if grow[x] else 0.0
            if pv == gv:
                continue
            any_flip = True
            for i in range(-2, 3):
                grow2 = grows[min(max(y + i, 0), h - 1)]
                wrow = weights[i + 2]
                for j in range(-2, 3):
                    gval = 1.0 if grow2[min(max(x + j, 0), w - 1)] else 0.0
                    total += wrow[j + 2] * abs(gval - pv)
    if not any_flip:
        return 0.0
    blocks = nubn_scalar(gt)
    if blocks == 0:
        raise ValueError("drd oracle: uniform ground truth")
    return total / blocks


def chebyshev_distances_scalar(targets):
    """Exhaustive min-over-targets Chebyshev distance for every pixel."""
    rows = _rows(targets)
    h, w = len(rows), len(rows[0])
    points = [(y, x) for y in range(h) for x in range(w) if rows[y][x]]
    dist = [[math.inf] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            best = math.inf
            for ty, tx in points:
                d = max(abs(ty - y), abs(tx - x))
                if d < best:
                    best = d
            dist[y][x] = best
    return dist


def contour_scalar(gt):
    rows = _rows(gt)
    h, w = len(rows), len(rows[0])
    out = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            if not rows[y][x]:
                continue
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dy == 0 and dx == 0:
                        continue
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and not rows[ny][nx]:
                        out[y][x] = True
    return out


def pseudo_f_measure_scalar(pred, gt, weighted: bool = True) -> float:
    prows = _rows(pred)
    grows = _rows(gt)
    h, w = len(grows), len(grows[0])
    if weighted:
        contour = contour_scalar(gt)
        if any(any(row) for row in contour):
            d_c = chebyshev_distances_scalar(contour)
            recall_w = [[1.0 / (1.0 + d_c[y][x]) for x in range(w)] for y in range(h)]
        else:
            recall_w = [[1.0] * w for _ in range(h)]
        d_f = chebyshev_distances_scalar(gt)
        fp_w = [[d_f[y][x] / (1.0 + d_f[y][x]) for x in range(w)] for y in range(h)]
    else:
        recall_w = [[1.0] * w for _ in range(h)]
        fp_w = [[1.0] * w for _ in range(h)]

    recall_num = recall_den = 0.0
    tp = fp_pen = 0.0
    for y in range(h):
        for x in range(w):
            p = prows[y][x]
            g = grows[y][x]
            if g:
                recall_den += recall_w[y][x]
                if p:
                    recall_num += recall_w[y][x]
            if p:
                if g:
                    tp += 1.0
                else:
                    fp_pen += fp_w[y][x]
    p_recall = recall_num / recall_den
    p_precision = tp / (tp + fp_pen) if tp + fp_pen > 0.0 else 0.0
    if p_precision + p_recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * p_precision * p_recall / (p_precision + p_recall)


def blend_mask_scalar(local, global_plane, local_weight: float, cutoff: float):
    """Per-pixel blend-and-threshold: True where blended intensity < cutoff."""
    lrows = _rows(local)
    grows = _rows(global_plane)
    return [
        [
            local_weight * l + (1.0 - local_weight) * g < cutoff
            for l, g in zip(lrow, grow)
        ]
        for lrow, grow in zip(lrows, grows)
    ]


def luma_scalar(raster):
    """BT.601 weighted sum, pixel by pixel."""
    rows = _rows(raster)
    return [
        [0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] for px in row]
        for row in rows
    ]
