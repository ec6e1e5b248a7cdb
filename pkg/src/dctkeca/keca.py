"""Kernel entropy component analysis.

The Gram matrix is used *uncentered*: the entropy contribution of an axis,
``(sqrt(lam) * e.sum())**2 / N**2``, is only informative when the kernel
matrix keeps its mean component. Axes are ranked by that contribution, not
by eigenvalue.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np

from .kernels import KernelConfig, cross_kernel, gram_matrix, median_heuristic

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-8
TOL_LAMBDA = 1e-12
TOL_ONE = 1e-10


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order with unit eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(K) -> EigenSystem:
    """Full symmetric eigendecomposition, signs fixed so ``e.sum() >= 0``."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {K.shape}")
    scale = max(np.abs(K).max(), 1.0)
    if np.abs(K - K.T).max() > 1e-12 * scale:
        raise ValueError("Gram matrix is not symmetric")
    lam, E = np.linalg.eigh(K)
    lam, E = lam[::-1], E[:, ::-1].copy()
    sums = E.sum(axis=0)
    # when e.sum() vanishes, fall back to the sign of the largest component
    pivot = E[np.abs(E).argmax(axis=0), np.arange(E.shape[1])]
    flip = np.where(np.abs(sums) > TOL_ONE, sums < 0, pivot < 0)
    E[:, flip] *= -1
    return EigenSystem(lam, E)


def _clamped_eigenvalues(es: EigenSystem) -> np.ndarray:
    lam = es.eigenvalues
    lam_max = max(float(lam.max()), 0.0)
    if lam.min() < -PSD_TOLERANCE * lam_max:
        raise NotPSDError(f"not PSD: eigenvalue {lam.min():.3e} vs max {lam_max:.3e}")
    return np.maximum(lam, 0.0)


def entropy_contributions(es: EigenSystem, N: int) -> np.ndarray:
    """Per-axis terms ``(sqrt(lam_i) * e_i.sum())**2 / N**2``."""
    lam = _clamped_eigenvalues(es)
    return lam * es.eigenvectors.sum(axis=0) ** 2 / N ** 2


def renyi_estimate(K) -> Tuple[float, float]:
    """Parzen estimate ``V = sum(K) / N**2`` and the entropy ``-log V``."""
    K = np.asarray(K, dtype=np.float64)
    V = float(K.sum()) / K.shape[0] ** 2
    if not V > 0:
        raise ValueError(f"information potential {V} is not positive")
    return V, -float(np.log(V))


@dataclass(frozen=True)
class Axis:
    eigenvalue: float
    eigenvector: np.ndarray
    contribution: float


def select_axes(es: EigenSystem, m: int, tol_lambda: float = TOL_LAMBDA,
                tol_one: float = TOL_ONE) -> List[Axis]:
    """Top-``m`` axes by entropy contribution among those with
    ``lam > tol_lambda * lam_max`` and ``|e.sum()| > tol_one``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    N = es.eigenvectors.shape[0]
    lam = _clamped_eigenvalues(es)
    sums = es.eigenvectors.sum(axis=0)
    contrib = lam * sums ** 2 / N ** 2
    ok = np.flatnonzero((lam > tol_lambda * lam.max()) & (np.abs(sums) > tol_one))
    if ok.size == 0:
        raise ValueError("no axis contributes to the entropy estimate")
    # stable sort keeps eigenvalue order among equal contributions
    ranked = ok[np.argsort(-contrib[ok], kind="stable")][:m]
    return [Axis(float(lam[i]), es.eigenvectors[:, i].copy(), float(contrib[i]))
            for i in ranked]


@dataclass(frozen=True)
class KecaModel:
    kernel: KernelConfig
    train: np.ndarray              # training vectors after standardization
    mean: np.ndarray
    scale: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray       # N x m, selected axes as columns
    contributions: np.ndarray
    embeddings: np.ndarray         # N x m
    requested_dim: int
    tol_lambda: float = TOL_LAMBDA
    tol_one: float = TOL_ONE
    warnings: tuple = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def standardize(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.train.shape[1]:
            raise ValueError(
                f"dimension mismatch: model expects {self.train.shape[1]}, got {X.shape[1]}")
        return (X - self.mean) / self.scale


def _standardization(X: np.ndarray, enabled: bool) -> Tuple[np.ndarray, np.ndarray]:
    d = X.shape[1]
    if not enabled:
        return np.zeros(d), np.ones(d)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, np.where(std > 0, std, 1.0)


def fit(features, cfg: KernelConfig = KernelConfig(), m: int = 20,
        tol_lambda: float = TOL_LAMBDA, tol_one: float = TOL_ONE) -> KecaModel:
    """Fit KECA on the rows of ``features``."""
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if len(X) < 2:
        raise ValueError("KECA needs at least two training vectors")
    if not np.isfinite(X).all():
        raise ValueError("training features contain non-finite values")
    mean, scale = _standardization(X, cfg.standardize)
    Z = (X - mean) / scale
    if cfg.family == "rbf" and cfg.sigma is None:
        cfg = replace(cfg, sigma=median_heuristic(Z))
    K = gram_matrix(Z, cfg)
    axes = select_axes(eigendecompose(K), m, tol_lambda, tol_one)
    warnings = ()
    if len(axes) < m:
        msg = f"only {len(axes)} usable KECA axes, requested {m}"
        logger.warning(msg)
        warnings = (msg,)
    lam = np.array([a.eigenvalue for a in axes])
    E = np.column_stack([a.eigenvector for a in axes])
    return KecaModel(
        kernel=cfg, train=Z, mean=mean, scale=scale,
        eigenvalues=lam, eigenvectors=E,
        contributions=np.array([a.contribution for a in axes]),
        embeddings=E * np.sqrt(lam), requested_dim=m,
        tol_lambda=tol_lambda, tol_one=tol_one, warnings=warnings)


def project(model: KecaModel, x) -> np.ndarray:
    """Out-of-sample embedding ``k(x)^T e_j / sqrt(lam_j)`` for each axis.

    Accepts a single vector (returns shape ``(m,)``) or a matrix of row
    vectors (returns ``(n, m)``).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    k = cross_kernel(model.standardize(x), model.train, model.kernel)
    z = (k @ model.eigenvectors) / np.sqrt(model.eigenvalues)
    return z[0] if single else z
