"""RBF and arc-cosine kernels, and Gram matrix construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

FAMILIES = ("arccos", "rbf")


@dataclass(frozen=True)
class KernelConfig:
    """Kernel selection. ``sigma=None`` means the median-distance heuristic."""

    family: str = "arccos"
    degree: int = 2
    sigma: Optional[float] = None
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"kernel family must be one of {FAMILIES}, got {self.family!r}")
        if self.family == "arccos" and self.degree not in (0, 1, 2):
            raise ValueError(f"arc-cosine degree must be 0, 1 or 2, got {self.degree!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")


def angle_between(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("angle undefined for a zero-norm vector")
    ux, uy = x / nx, y / ny
    # atan2 form stays accurate near 0 and pi, unlike acos of the cosine
    return 2.0 * math.atan2(float(np.linalg.norm(ux - uy)), float(np.linalg.norm(ux + uy)))


def j_func(theta, n: int):
    """Angular profile of the degree-``n`` arc-cosine kernel."""
    t = np.asarray(theta, dtype=np.float64)
    if n == 0:
        out = np.pi - t
    elif n == 1:
        out = np.sin(t) + (np.pi - t) * np.cos(t)
    elif n == 2:
        c = np.cos(t)
        out = 3 * np.sin(t) * c + (np.pi - t) * (1 + 2 * c * c)
    else:
        raise ValueError(f"unsupported arc-cosine degree {n}")
    return float(out) if out.ndim == 0 else out


def arc_cosine_kernel(x, y, n: int = 2) -> float:
    """``(1/pi) |x|^n |y|^n J_n(theta)``; zero when a vector vanishes and n >= 1."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        if n == 0:
            raise ValueError("degree-0 arc-cosine kernel undefined at the zero vector")
        j_func(0.0, n)  # validates degree
        return 0.0
    theta = angle_between(x, y)
    return (nx * ny) ** n * j_func(theta, n) / np.pi


def rbf_kernel(x, y, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return math.exp(-float(d @ d) / (2 * sigma * sigma))


def median_heuristic(X) -> float:
    """Median pairwise Euclidean distance; 1.0 when all points coincide."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if len(X) < 2:
        return 1.0
    med = float(np.median(pdist(X)))
    return med if med > 0 else 1.0


def cross_kernel(X, Y, cfg: KernelConfig, symmetric: bool = False) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(X[i], Y[j])``.

    ``symmetric=True`` asserts ``X is Y`` so the arc-cosine diagonal is
    evaluated at zero angle exactly.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if cfg.family == "rbf":
        sigma = cfg.sigma if cfg.sigma is not None else median_heuristic(X)
        return np.exp(-cdist(X, Y, "sqeuclidean") / (2 * sigma * sigma))
    nx = np.sqrt(np.einsum("ij,ij->i", X, X))
    ny = np.sqrt(np.einsum("ij,ij->i", Y, Y))
    n = cfg.degree
    norms = np.outer(nx, ny)
    zero = norms == 0
    if zero.any() and n == 0:
        raise ValueError("degree-0 arc-cosine kernel undefined at the zero vector")
    ux = X / np.where(nx == 0, 1.0, nx)[:, None]
    uy = Y / np.where(ny == 0, 1.0, ny)[:, None]
    # angle from chord lengths of unit vectors; acos of a cosine near 1 loses ~1e-8
    theta = 2.0 * np.arctan2(cdist(ux, uy), cdist(ux, -uy))
    theta[zero] = 0.0
    if symmetric:
        np.fill_diagonal(theta, 0.0)
    return norms ** n * j_func(theta, n) / np.pi


def gram_matrix(X, cfg: KernelConfig) -> np.ndarray:
    """Symmetric Gram matrix of the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if len(X) < 1:
        raise ValueError("need at least one point")
    K = cross_kernel(X, X, cfg, symmetric=True)
    upper = np.triu(K)
    return upper + np.triu(K, 1).T
