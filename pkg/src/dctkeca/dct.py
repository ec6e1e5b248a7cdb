"""Orthonormal 2-D DCT, zig-zag ordering and JPEG quality-factor quantization."""

from __future__ import annotations

from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy.fft import dctn, idctn

# Standard JPEG luminance quantization table (ITU-T T.81, Annex K.1).
# fmt: off
JPEG_LUMINANCE_TABLE = np.array([
    16,  11,  10,  16,  24,  40,  51,  61,
    12,  12,  14,  19,  26,  58,  60,  55,
    14,  13,  16,  24,  40,  57,  69,  56,
    14,  17,  22,  29,  51,  87,  80,  62,
    18,  22,  37,  56,  68, 109, 103,  77,
    24,  35,  55,  64,  81, 104, 113,  92,
    49,  64,  78,  87, 103, 121, 120, 101,
    72,  92,  95,  98, 112, 100, 103,  99,
], dtype=np.int64).reshape(8, 8)
# fmt: on
JPEG_LUMINANCE_TABLE.setflags(write=False)


def dct2(x) -> np.ndarray:
    """Orthonormal 2-D DCT-II; ``(0, 0)`` is the DC term."""
    return dctn(np.asarray(x, dtype=np.float64), type=2, norm="ortho")


def idct2(c) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    return idctn(np.asarray(c, dtype=np.float64), type=2, norm="ortho")


@lru_cache(maxsize=64)
def _zigzag(rows: int, cols: int) -> Tuple[Tuple[int, int], ...]:
    order = []
    for s in range(rows + cols - 1):
        diag = [(u, s - u) for u in range(max(0, s - cols + 1), min(s, rows - 1) + 1)]
        # odd anti-diagonals run top-right to bottom-left, even ones the reverse
        order.extend(diag if s % 2 else diag[::-1])
    return tuple(order)


def zigzag_order(n: int, m: Optional[int] = None) -> List[Tuple[int, int]]:
    """JPEG zig-zag traversal of an ``n`` x ``m`` grid as (row, col) pairs.

    ``m`` defaults to ``n``. Rectangular grids follow the same anti-diagonal
    walk with out-of-range cells skipped.
    """
    m = n if m is None else m
    if n < 1 or m < 1:
        raise ValueError("grid dimensions must be positive")
    return list(_zigzag(n, m))


def zigzag_indices(n: int, m: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column index arrays of :func:`zigzag_order`, for fancy indexing."""
    order = np.array(zigzag_order(n, m))
    return order[:, 0], order[:, 1]


def scale_quant_matrix(quality: int, base: np.ndarray = JPEG_LUMINANCE_TABLE) -> np.ndarray:
    """Scale a base quantization table to a JPEG quality factor in 1..100.

    Uses the IJG convention: scale ``50/q`` below 50 and ``2 - q/50`` from 50
    upward; entries are rounded half-up and clamped to [1, 255].
    """
    if isinstance(quality, bool) or int(quality) != quality or not 1 <= quality <= 100:
        raise ValueError(f"quality must be an integer in 1..100, got {quality!r}")
    scale = 50.0 / quality if quality < 50 else 2.0 - quality / 50.0
    scaled = np.floor(np.asarray(base, dtype=np.float64) * scale + 0.5)
    return np.clip(scaled, 1, 255).astype(np.int64)


def resize_quant_matrix(qm: np.ndarray, size: int) -> np.ndarray:
    """Nearest-cell resampling of an 8x8 table to ``size`` x ``size`` blocks."""
    qm = np.asarray(qm)
    if size == qm.shape[0]:
        return qm
    idx = (np.arange(size) * qm.shape[0]) // size
    return qm[np.ix_(idx, idx)]


def quantize_block(block, qm) -> np.ndarray:
    """Quantize then dequantize: ``round(c / q) * q`` elementwise."""
    block = np.asarray(block, dtype=np.float64)
    qm = np.asarray(qm)
    if block.shape != qm.shape:
        raise ValueError(f"block shape {block.shape} does not match quantizer {qm.shape}")
    return np.round(block / qm) * qm
