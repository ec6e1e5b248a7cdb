"""Illumination normalization in the logarithm domain.

Pipeline: log transform, histogram-based variance equalization, global DCT,
zeroing of the lowest-frequency AC coefficients, DC replacement, inverse DCT.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dct import dct2, idct2, zigzag_indices


@dataclass(frozen=True)
class IlluminationParams:
    """Parameters of :func:`normalize_illumination`.

    ``dc_target`` is the log-domain mean forced onto the output. ``None``
    uses each image's own log mean instead; that choice reintroduces a
    ``log(gain)`` offset between differently lit copies of one scene.
    """

    epsilon: float = 1e-4
    levels: int = 256
    suppress_count: int = 3
    equalize: bool = True
    dc_target: Optional[float] = 0.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.levels < 2:
            raise ValueError("levels must be at least 2")
        if self.suppress_count < 0:
            raise ValueError("suppress_count must be non-negative")


def log_transform(img, epsilon: float = 1e-4) -> np.ndarray:
    """``log(max(p, epsilon))`` per pixel."""
    x = np.asarray(img, dtype=np.float64)
    if (x < 0).any():
        raise ValueError("negative input pixel")
    return np.log(np.maximum(x, epsilon))


def variance_equalize(img, levels: int = 256) -> np.ndarray:
    """Map intensities through their cumulative histogram scaled by 1/std.

    Pixels are binned into ``levels`` equal-width bins over [min, max]; each
    pixel takes the cumulative count of its bin divided by the image standard
    deviation, and the result is rescaled affinely onto [0, levels - 1].
    """
    x = np.asarray(img, dtype=np.float64)
    sigma = x.std()
    lo, hi = x.min(), x.max()
    # std of a constant image can round to a tiny nonzero value
    if not sigma > 0 or hi == lo:
        raise ValueError("degenerate contrast: image has zero standard deviation")
    bins = np.minimum(((x - lo) / (hi - lo) * levels).astype(np.int64), levels - 1)
    cumulative = np.cumsum(np.bincount(bins.ravel(), minlength=levels))
    v = cumulative[bins] / sigma
    v_lo, v_hi = v.min(), v.max()
    return (v - v_lo) / (v_hi - v_lo) * (levels - 1)


def suppress_low_freq(coeffs, k: int, mu: float) -> np.ndarray:
    """Zero zig-zag positions 1..k and set DC so the reconstruction mean is ``mu``."""
    c = np.array(coeffs, dtype=np.float64)
    rows, cols = c.shape
    if not 0 <= k < c.size:
        raise ValueError(f"suppress count {k} out of range for {rows}x{cols} grid")
    zr, zc = zigzag_indices(rows, cols)
    c[zr[1:k + 1], zc[1:k + 1]] = 0.0
    c[0, 0] = mu * np.sqrt(c.size)
    return c


def normalize_illumination(img, params: IlluminationParams = IlluminationParams()) -> np.ndarray:
    """Full log-domain normalization; returns a real-valued image."""
    logged = log_transform(img, params.epsilon)
    mu = float(logged.mean()) if params.dc_target is None else float(params.dc_target)
    work = variance_equalize(logged, params.levels) if params.equalize else logged
    return idct2(suppress_low_freq(dct2(work), params.suppress_count, mu))
