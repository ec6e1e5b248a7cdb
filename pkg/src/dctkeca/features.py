"""Entropy-guided selection of one block-DCT coefficient per image block."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .dct import dct2, quantize_block, resize_quant_matrix, scale_quant_matrix, zigzag_indices

MEASURES = ("shannon", "renyi")
FEATURE_VALUES = ("coefficient", "entropy")


@dataclass(frozen=True)
class EntropyConfig:
    block_size: int = 8
    quality: int = 50
    measure: str = "renyi"
    renyi_order: float = 2.0
    feature_value: str = "coefficient"

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        scale_quant_matrix(self.quality)  # validates range
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        if self.measure == "renyi":
            _check_order(self.renyi_order)
        if self.feature_value not in FEATURE_VALUES:
            raise ValueError(
                f"feature_value must be one of {FEATURE_VALUES}, got {self.feature_value!r}")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    block_count: int
    measure: str
    degenerate_blocks: int = 0
    positions: tuple = ()


def _check_order(q: float) -> None:
    if not q > 0 or q == 1:
        raise ValueError(f"renyi order must be positive and != 1, got {q!r}")


def block_partition(img, G: int) -> List[np.ndarray]:
    """Crop to multiples of ``G`` and tile into ``G`` x ``G`` blocks, raster order."""
    x = np.asarray(img, dtype=np.float64)
    if G < 1:
        raise ValueError("block size must be positive")
    rows, cols = x.shape
    if G > rows or G > cols:
        raise ValueError(f"block size {G} exceeds image dimensions {cols}x{rows}")
    br, bc = rows // G, cols // G
    tiles = x[:br * G, :bc * G].reshape(br, G, bc, G).swapaxes(1, 2)
    return [tiles[i, j] for i in range(br) for j in range(bc)]


def coefficient_probabilities(coeffs) -> np.ndarray:
    """``|c| / sum|c|`` over the grid."""
    mag = np.abs(np.asarray(coeffs, dtype=np.float64))
    total = mag.sum()
    if total == 0:
        raise ValueError("degenerate block: all coefficients are zero")
    return mag / total


def _check_probabilities(p: np.ndarray) -> None:
    if ((p < 0) | (p > 1)).any() or np.isnan(p).any():
        raise ValueError("probabilities must lie in [0, 1]")


def shannon_map(p) -> np.ndarray:
    """Binary entropy ``-(p log p + (1-p) log(1-p))`` in nats, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    _check_probabilities(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, p * np.log(p), 0.0)
        b = np.where(p < 1, (1 - p) * np.log1p(-p), 0.0)
    return -(a + b)


def renyi_map(p, q: float = 2.0) -> np.ndarray:
    """Binary Renyi entropy of order ``q``: ``log(p^q + (1-p)^q) / (1 - q)``."""
    _check_order(q)
    p = np.asarray(p, dtype=np.float64)
    _check_probabilities(p)
    return np.log(p ** q + (1 - p) ** q) / (1 - q)


def _entropy(p: np.ndarray, cfg: EntropyConfig) -> np.ndarray:
    if cfg.measure == "shannon":
        return shannon_map(p)
    return renyi_map(p, cfg.renyi_order)


def extract_features(img, cfg: EntropyConfig = EntropyConfig()) -> FeatureVector:
    """One feature per block: the quantized coefficient of highest entropy.

    Each block is DCT-transformed and quantized at ``cfg.quality``; per-block
    coefficient probabilities feed the entropy map and the argmax position
    (ties resolved toward the lower zig-zag position) gives either the
    quantized coefficient or its entropy score. All-zero blocks emit 0.
    """
    G = cfg.block_size
    qm = resize_quant_matrix(scale_quant_matrix(cfg.quality), G)
    zr, zc = zigzag_indices(G)
    values, positions = [], []
    degenerate = 0
    for block in block_partition(img, G):
        q = quantize_block(dct2(block), qm)
        mag = np.abs(q)
        total = mag.sum()
        if total == 0:
            degenerate += 1
            values.append(0.0)
            positions.append(None)
            continue
        scores = _entropy(mag / total, cfg)[zr, zc]
        best = int(np.argmax(scores))
        values.append(q[zr[best], zc[best]] if cfg.feature_value == "coefficient"
                      else scores[best])
        positions.append((int(zr[best]), int(zc[best])))
    return FeatureVector(np.array(values, dtype=np.float64), len(values), cfg.measure,
                         degenerate, tuple(positions))
