"""Train/test protocols (first-n split, leave-one-out) and reporting."""

from __future__ import annotations

import json
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .classifier import classify_batch, fit_classifier
from .config import PipelineConfig
from .features import extract_features
from .illumination import normalize_illumination
from .image_io import DatasetManifest, GrayImage, ManifestEntry, downsample, load_pgm
from .keca import fit as fit_keca, project


class PipelineError(RuntimeError):
    """Failure in a named stage, carrying the offending file when known."""

    def __init__(self, stage: str, message: str, path=None):
        self.stage, self.path = stage, path
        where = f" [{path}]" if path is not None else ""
        super().__init__(f"{stage}{where}: {message}")


@dataclass(frozen=True)
class SplitPlan:
    """Positions into ``manifest.entries`` used for training and testing."""

    protocol: str
    train: tuple
    test: tuple


def split_ep1(manifest: DatasetManifest, n_train: int) -> SplitPlan:
    """First ``n_train`` images (by manifest index) of every subject train, the rest test."""
    if n_train < 1:
        raise ValueError("n_train must be at least 1")
    train, test = [], []
    for pos, e in enumerate(manifest.entries):
        (train if e.index <= n_train else test).append(pos)
    for subject, group in manifest.by_subject().items():
        if len(group) <= n_train:
            raise ValueError(
                f"subject {subject} has {len(group)} images; needs more than {n_train}")
    return SplitPlan(f"ep1({n_train})", tuple(train), tuple(test))


def split_loo(manifest: DatasetManifest) -> List[SplitPlan]:
    for subject, group in manifest.by_subject().items():
        if len(group) < 2:
            raise ValueError(f"subject {subject} has a single image; leave-one-out needs 2")
    n = len(manifest)
    return [SplitPlan("loo", tuple(p for p in range(n) if p != k), (k,)) for k in range(n)]


def _safe_ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass
class EvaluationReport:
    protocol: str
    labels: List[str]
    confusion: np.ndarray              # rows: true label, cols: predicted
    config: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    n_train: int = 0
    method: str = "pipeline"

    @property
    def accuracy(self) -> float:
        total = self.confusion.sum()
        return float(np.trace(self.confusion) / total) if total else 0.0

    def per_class(self) -> Dict[str, dict]:
        C = self.confusion
        total = int(C.sum())
        out = {}
        for k, label in enumerate(self.labels):
            tp = int(C[k, k])
            fn = int(C[k].sum()) - tp
            fp = int(C[:, k].sum()) - tp
            tn = total - tp - fn - fp
            out[label] = {"sensitivity": _safe_ratio(tp, tp + fn),
                          "specificity": _safe_ratio(tn, tn + fp),
                          "support": tp + fn}
        return out

    def to_dict(self) -> dict:
        per_class = self.per_class()
        sens = [v["sensitivity"] for v in per_class.values() if v["sensitivity"] is not None]
        spec = [v["specificity"] for v in per_class.values() if v["specificity"] is not None]
        return {
            "method": self.method,
            "protocol": self.protocol,
            "accuracy": self.accuracy,
            "n_train": self.n_train,
            "n_test": int(self.confusion.sum()),
            "macro_sensitivity": float(np.mean(sens)) if sens else None,
            "macro_specificity": float(np.mean(spec)) if spec else None,
            "per_class": per_class,
            "confusion": {"labels": list(self.labels),
                          "matrix": self.confusion.astype(int).tolist()},
            "config": self.config,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_row(self) -> Dict[str, object]:
        d = self.to_dict()
        return {k: d[k] for k in ("method", "protocol", "accuracy", "macro_sensitivity",
                                  "macro_specificity", "n_train", "n_test")}


def _resolve_threads(threads: Optional[int]) -> int:
    return max(1, threads if threads else (os.cpu_count() or 1))


def _pmap(fn: Callable, items: Sequence, threads: Optional[int]) -> list:
    threads = _resolve_threads(threads)
    if threads == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def prepare_image(img: GrayImage, cfg: PipelineConfig) -> GrayImage:
    if cfg.width is None:
        return img
    return downsample(img, cfg.width, cfg.height)


def image_features(img: GrayImage, cfg: PipelineConfig):
    """Resample, normalize and extract the entropy-selected feature vector."""
    normalized = normalize_illumination(prepare_image(img, cfg).pixels, cfg.illumination)
    return extract_features(normalized, cfg.entropy)


def _load(entry: ManifestEntry) -> GrayImage:
    try:
        return load_pgm(entry.path)
    except (OSError, ValueError) as exc:
        raise PipelineError("load", str(exc), entry.path) from None


def extract_dataset(entries: Sequence[ManifestEntry], cfg: PipelineConfig,
                    threads: Optional[int] = None):
    """Feature matrix (one row per entry) and warning strings."""
    def one(entry):
        img = _load(entry)
        try:
            return image_features(img, cfg)
        except ValueError as exc:
            raise PipelineError("features", str(exc), entry.path) from None

    fvs = _pmap(one, list(entries), threads)
    warnings = [f"{e.path}: {fv.degenerate_blocks} degenerate block(s) emitted as 0"
                for e, fv in zip(entries, fvs) if fv.degenerate_blocks]
    return np.stack([fv.values for fv in fvs]), warnings


def raw_pixel_dataset(entries: Sequence[ManifestEntry], cfg: PipelineConfig,
                      threads: Optional[int] = None) -> np.ndarray:
    return np.stack(_pmap(lambda e: prepare_image(_load(e), cfg).pixels.ravel(),
                          list(entries), threads))


def _fold_predictions(X: np.ndarray, labels: Sequence[str], split: SplitPlan,
                      cfg: PipelineConfig, method: str):
    y = [labels[p] for p in split.train]
    Xtr, Xte = X[list(split.train)], X[list(split.test)]
    warnings: List[str] = []
    if method == "baseline":
        clf = fit_classifier(Xtr, y, metric="l2")
        return classify_batch(Xte, clf)[0], warnings
    try:
        model = fit_keca(Xtr, cfg.kernel, cfg.components, cfg.tol_lambda, cfg.tol_one)
        warnings.extend(model.warnings)
        clf = fit_classifier(model.embeddings, y, cfg.metric, cfg.ridge)
        pred = classify_batch(project(model, Xte), clf)[0]
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise PipelineError("fit", str(exc)) from None
    return pred, warnings


def _aggregate(manifest: DatasetManifest, splits: Sequence[SplitPlan], X: np.ndarray,
               cfg: PipelineConfig, method: str, threads: Optional[int],
               warnings: List[str], label_override: Optional[Sequence[str]] = None
               ) -> EvaluationReport:
    labels = list(label_override) if label_override is not None else \
        [e.subject_id for e in manifest.entries]
    classes = sorted(set(labels))
    index = {c: k for k, c in enumerate(classes)}
    results = _pmap(lambda s: _fold_predictions(X, labels, s, cfg, method), list(splits),
                    threads if len(splits) > 1 else 1)
    C = np.zeros((len(classes), len(classes)), dtype=np.int64)
    fold_warnings: Counter = Counter()
    for split, (pred, ws) in zip(splits, results):
        for p, guess in zip(split.test, pred):
            C[index[labels[p]], index[guess]] += 1
        fold_warnings.update(ws)
    all_warnings = list(warnings) + [
        f"{w} (in {n} fold(s))" if len(splits) > 1 else w
        for w, n in sorted(fold_warnings.items())]
    protocol = splits[0].protocol if splits else ""
    return EvaluationReport(protocol, classes, C, cfg.flat(), all_warnings,
                            n_train=len(splits[0].train) if splits else 0, method=method)


def evaluate(manifest: DatasetManifest, splits, cfg: PipelineConfig = PipelineConfig(),
             threads: Optional[int] = None, features: Optional[np.ndarray] = None,
             labels: Optional[Sequence[str]] = None) -> EvaluationReport:
    """Run the full pipeline over one split or a list of folds and pool the confusion.

    Per-image features depend only on the image, so they are extracted once
    and shared by all folds; KECA and the classifier are refit per fold.
    ``labels`` replaces the manifest's subject ids (used for permutation tests).
    """
    splits = [splits] if isinstance(splits, SplitPlan) else list(splits)
    warnings: List[str] = []
    if features is None:
        features, warnings = extract_dataset(manifest.entries, cfg, threads)
    return _aggregate(manifest, splits, features, cfg, "pipeline", threads, warnings, labels)


def run_pipeline(manifest: DatasetManifest, split: SplitPlan,
                 cfg: PipelineConfig = PipelineConfig(),
                 threads: Optional[int] = None) -> EvaluationReport:
    return evaluate(manifest, split, cfg, threads)


def baseline_raw_pixels(manifest: DatasetManifest, splits,
                        cfg: PipelineConfig = PipelineConfig(),
                        threads: Optional[int] = None) -> EvaluationReport:
    """Nearest-class-mean with squared L2 on resampled raw pixel vectors."""
    splits = [splits] if isinstance(splits, SplitPlan) else list(splits)
    X = raw_pixel_dataset(manifest.entries, cfg, threads)
    return _aggregate(manifest, splits, X, cfg, "baseline", threads, [])
