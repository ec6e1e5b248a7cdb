"""Nearest-class-mean classification with L2, cosine and Mahalanobis measures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

METRICS = ("l2", "cosine", "mahalanobis")


def class_means(embeddings, labels: Sequence[str]) -> Dict[str, np.ndarray]:
    """Arithmetic mean embedding per label, keyed in sorted label order."""
    Z = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    labels = np.asarray(labels)
    if len(labels) != len(Z):
        raise ValueError("labels and embeddings differ in length")
    if len(Z) == 0:
        raise ValueError("empty class: no embeddings given")
    return {lab: Z[labels == lab].mean(axis=0) for lab in sorted(set(labels.tolist()))}


def distance(x, y, metric: str = "l2", cov_inv: Optional[np.ndarray] = None) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if (metric == "mahalanobis") != (cov_inv is not None):
        raise ValueError("an inverse covariance is required for, and only for, mahalanobis")
    if metric == "l2":
        d = x - y
        return float(d @ d)
    if metric == "cosine":
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx == 0 or ny == 0:
            raise ValueError("cosine distance undefined for a zero-norm vector")
        return -float(x @ y) / (nx * ny)
    if metric == "mahalanobis":
        d = x - y
        return float(d @ cov_inv @ d)
    raise ValueError(f"unknown metric {metric!r}")


def fit_covariance(embeddings, labels: Sequence[str], ridge: float = 1e-6
                   ) -> Tuple[np.ndarray, np.ndarray]:
    """Pooled within-class covariance plus ``ridge * (trace / d) * I``.

    With zero within-class scatter the regularizer scale falls back to 1.
    """
    Z = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    labels = np.asarray(labels)
    if len(Z) < 2:
        raise ValueError("covariance needs at least two embeddings")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if not np.isfinite(Z).all():
        raise ValueError("covariance has non-finite entries")
    means = class_means(Z, labels)
    centered = Z - np.stack([means[lab] for lab in labels.tolist()])
    dof = max(len(Z) - len(means), 1)
    S = centered.T @ centered / dof
    if not np.isfinite(S).all():
        raise ValueError("covariance has non-finite entries")
    d = S.shape[0]
    tr = np.trace(S) / d
    S = S + ridge * (tr if tr > 0 else 1.0) * np.eye(d)
    S = (S + S.T) / 2
    return S, np.linalg.inv(S)


@dataclass(frozen=True)
class ClassifierModel:
    labels: tuple
    means: np.ndarray              # one row per label, same order as ``labels``
    metric: str = "mahalanobis"
    covariance: Optional[np.ndarray] = None
    cov_inv: Optional[np.ndarray] = None
    ridge: float = 1e-6

    def distances(self, X) -> np.ndarray:
        """``(n, n_classes)`` distances from each row of ``X`` to every mean."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        M = self.means
        if X.shape[1] != M.shape[1]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {M.shape[1]}")
        if self.metric == "l2":
            diff = X[:, None, :] - M[None, :, :]
            return np.einsum("nkd,nkd->nk", diff, diff)
        if self.metric == "cosine":
            nx = np.linalg.norm(X, axis=1)
            nm = np.linalg.norm(M, axis=1)
            if (nx == 0).any() or (nm == 0).any():
                raise ValueError("cosine distance undefined for a zero-norm vector")
            return -(X @ M.T) / np.outer(nx, nm)
        diff = X[:, None, :] - M[None, :, :]
        return np.einsum("nkd,de,nke->nk", diff, self.cov_inv, diff)


def fit_classifier(embeddings, labels: Sequence[str], metric: str = "mahalanobis",
                   ridge: float = 1e-6) -> ClassifierModel:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    means = class_means(embeddings, labels)
    cov = cov_inv = None
    if metric == "mahalanobis":
        cov, cov_inv = fit_covariance(embeddings, labels, ridge)
    return ClassifierModel(tuple(means), np.stack(list(means.values())), metric,
                           cov, cov_inv, ridge)


def classify_batch(X, model: ClassifierModel) -> Tuple[list, np.ndarray]:
    """Labels and winning distances; ties go to the lexicographically smallest label."""
    D = model.distances(X)
    # labels are stored sorted, so argmin's first-hit rule is the tie-break
    best = np.argmin(D, axis=1)
    return [model.labels[i] for i in best], D[np.arange(len(D)), best]


def classify(x, model: ClassifierModel) -> str:
    return classify_batch(np.asarray(x)[None, :], model)[0][0]
