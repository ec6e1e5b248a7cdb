"""Brute-force reference implementations used to check the fast paths.

Nothing here imports from the rest of the package: the DCT is a literal
double sum, the arc-cosine kernel is a Monte-Carlo estimate of its Gaussian
integral, and the block scan re-derives quantization and zig-zag order.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.stats import norm, qmc

# fmt: off
_LUMA = [
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
]
# fmt: on


def dct2_direct(img) -> np.ndarray:
    """O(M^2 N^2) orthonormal DCT-II by explicit summation."""
    x = np.asarray(img, dtype=np.float64)
    M, N = x.shape
    out = np.zeros((M, N))
    for u in range(M):
        au = math.sqrt((1 if u == 0 else 2) / M)
        for v in range(N):
            av = math.sqrt((1 if v == 0 else 2) / N)
            s = 0.0
            for i in range(M):
                cu = math.cos((2 * i + 1) * u * math.pi / (2 * M))
                for j in range(N):
                    s += x[i, j] * cu * math.cos((2 * j + 1) * v * math.pi / (2 * N))
            out[u, v] = au * av * s
    return out


@lru_cache(maxsize=8)
def _gaussian_draws(d: int, log2_n: int, seed: int) -> np.ndarray:
    u = qmc.Sobol(d, scramble=True, seed=seed).random_base2(log2_n)
    w = norm.ppf(np.clip(u, 1e-16, 1 - 1e-16))
    w.setflags(write=False)
    return w


def arccos_kernel_mc(x, y, n: int, samples: int = 1 << 20, seed: int = 0):
    """Estimate ``2 E[H(w.x) H(w.y) (w.x)^n (w.y)^n]`` for ``w ~ N(0, I)``.

    Draws come from a scrambled Sobol sequence (``2**ceil(log2(samples))``
    points) pushed through the normal quantile, so results are reproducible.
    Returns ``(estimate, stderr)``; the stderr is the i.i.d. formula and
    overstates the QMC error.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = _gaussian_draws(x.size, max(1, math.ceil(math.log2(samples))), seed)
    a, b = w @ x, w @ y
    vals = 2.0 * ((a > 0) & (b > 0)) * (a ** n) * (b ** n)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def _zigzag_by_sort(n: int):
    cells = [(r, c) for r in range(n) for c in range(n)]
    # within anti-diagonal s, even s walks up (row descending), odd s walks down
    return sorted(cells, key=lambda rc: (rc[0] + rc[1],
                                         -rc[0] if (rc[0] + rc[1]) % 2 == 0 else rc[0]))


def _binary_entropy(p: float, measure: str, q: float) -> float:
    if measure == "shannon":
        h = 0.0
        for t in (p, 1.0 - p):
            if t > 0:
                h -= t * math.log(t)
        return h
    return math.log(p ** q + (1.0 - p) ** q) / (1.0 - q)


def entropy_argmax_scan(block, quality: int = 50, measure: str = "renyi", q: float = 2.0,
                        feature_value: str = "coefficient"):
    """Exhaustive scan of one 8x8 pixel block.

    Returns ``((row, col), value)`` for the highest-entropy quantized
    coefficient, earlier zig-zag position winning ties; ``(None, 0.0)`` for a
    block that quantizes to all zeros.
    """
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (8, 8):
        raise ValueError("oracle scan expects an 8x8 block")
    coeffs = dct2_direct(block)
    scale = 50.0 / quality if quality < 50 else 2.0 - quality / 50.0
    quant = [[0.0] * 8 for _ in range(8)]
    for r in range(8):
        for c in range(8):
            step = min(255, max(1, math.floor(_LUMA[r][c] * scale + 0.5)))
            quant[r][c] = round(coeffs[r, c] / step) * step
    total = sum(abs(quant[r][c]) for r in range(8) for c in range(8))
    if total == 0:
        return None, 0.0
    best, best_h = None, -math.inf
    for r, c in _zigzag_by_sort(8):
        h = _binary_entropy(abs(quant[r][c]) / total, measure, q)
        if h > best_h:
            best, best_h = (r, c), h
    value = quant[best[0]][best[1]] if feature_value == "coefficient" else best_h
    return best, float(value)
