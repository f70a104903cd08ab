"""Independent oracle implementations shared between unit and acceptance tests.

Everything here is deliberately written with different algorithms than the
package code: counting-based ranks instead of argsort, explicit Python-loop
moments instead of vectorized dot products, sliding double loops instead of
filtering. Slow and dumb on purpose.
"""

from __future__ import annotations

import math

import numpy as np


def oracle_ranks(values) -> list[float]:
    """Average ranks computed by pairwise comparison counting."""
    values = list(values)
    ranks = []
    for v in values:
        less = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        ranks.append(less + (equal + 1) / 2.0)
    return ranks


def oracle_srcc(xs, ys) -> float:
    """Rank both lists with average ties, then Pearson on the ranks."""
    rx = oracle_ranks(xs)
    ry = oracle_ranks(ys)
    n = len(rx)
    mean_x = sum(rx) / n
    mean_y = sum(ry) / n
    num = 0.0
    sxx = 0.0
    syy = 0.0
    for a, b in zip(rx, ry):
        dx = a - mean_x
        dy = b - mean_y
        num += dx * dy
        sxx += dx * dx
        syy += dy * dy
    rho = num / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


def oracle_ssim(img_a, img_b, window, k1=0.01, k2=0.03) -> float:
    """Naive sliding-window SSIM over a luma pair, windows fully inside."""
    c1 = (k1 * 1.0) ** 2
    c2 = (k2 * 1.0) ** 2
    size = window.shape[0]
    h, w = img_a.shape
    values = []
    for top in range(h - size + 1):
        for left in range(w - size + 1):
            pa = img_a[top : top + size, left : left + size]
            pb = img_b[top : top + size, left : left + size]
            mu_a = float((pa * window).sum())
            mu_b = float((pb * window).sum())
            var_a = float((pa * pa * window).sum()) - mu_a * mu_a
            var_b = float((pb * pb * window).sum()) - mu_b * mu_b
            cov = float((pa * pb * window).sum()) - mu_a * mu_b
            values.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(values))


def luma601(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    return arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
