"""Versioned text serialization of a fitted KECA model and its classifier.

Layout: the first line is the magic ``DCTKECA-MODEL <version>``; the rest of
the file is one JSON object with keys ``config`` (flat pipeline config),
``keca`` and ``classifier``. Arrays are nested lists of floats written with
``repr`` precision, so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Tuple

import numpy as np

from .classifier import ClassifierModel
from .config import PipelineConfig, build_config
from .keca import KecaModel
from .kernels import KernelConfig

MAGIC = "DCTKECA-MODEL"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def _arr(a):
    return None if a is None else np.asarray(a).tolist()


def dumps(cfg: PipelineConfig, keca: KecaModel, clf: ClassifierModel) -> str:
    body = {
        "config": cfg.flat(),
        "keca": {
            "kernel": {"family": keca.kernel.family, "degree": keca.kernel.degree,
                       "sigma": keca.kernel.sigma, "standardize": keca.kernel.standardize},
            "train": _arr(keca.train),
            "mean": _arr(keca.mean),
            "scale": _arr(keca.scale),
            "eigenvalues": _arr(keca.eigenvalues),
            "eigenvectors": _arr(keca.eigenvectors),
            "contributions": _arr(keca.contributions),
            "embeddings": _arr(keca.embeddings),
            "requested_dim": keca.requested_dim,
            "tol_lambda": keca.tol_lambda,
            "tol_one": keca.tol_one,
            "warnings": list(keca.warnings),
        },
        "classifier": {
            "labels": list(clf.labels),
            "means": _arr(clf.means),
            "metric": clf.metric,
            "covariance": _arr(clf.covariance),
            "cov_inv": _arr(clf.cov_inv),
            "ridge": clf.ridge,
        },
    }
    return f"{MAGIC} {VERSION}\n" + json.dumps(body, sort_keys=True) + "\n"


def loads(text: str) -> Tuple[PipelineConfig, KecaModel, ClassifierModel]:
    header, _, payload = text.partition("\n")
    parts = header.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise ModelFormatError("not a model file (bad magic header)")
    if parts[1] != str(VERSION):
        raise ModelFormatError(f"unsupported model version {parts[1]}")
    try:
        body = json.loads(payload)
        k, c = body["keca"], body["classifier"]
        cfg = build_config(body["config"])
        keca = KecaModel(
            kernel=KernelConfig(**k["kernel"]),
            train=np.array(k["train"], dtype=np.float64),
            mean=np.array(k["mean"], dtype=np.float64),
            scale=np.array(k["scale"], dtype=np.float64),
            eigenvalues=np.array(k["eigenvalues"], dtype=np.float64),
            eigenvectors=np.array(k["eigenvectors"], dtype=np.float64),
            contributions=np.array(k["contributions"], dtype=np.float64),
            embeddings=np.array(k["embeddings"], dtype=np.float64),
            requested_dim=int(k["requested_dim"]),
            tol_lambda=float(k["tol_lambda"]), tol_one=float(k["tol_one"]),
            warnings=tuple(k["warnings"]))
        opt = lambda a: None if a is None else np.array(a, dtype=np.float64)  # noqa: E731
        clf = ClassifierModel(tuple(c["labels"]), np.array(c["means"], dtype=np.float64),
                              c["metric"], opt(c["covariance"]), opt(c["cov_inv"]),
                              float(c["ridge"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from None
    return cfg, keca, clf


def save_model(path, cfg: PipelineConfig, keca: KecaModel, clf: ClassifierModel) -> None:
    Path(path).write_text(dumps(cfg, keca, clf), encoding="utf-8")


def load_model(path):
    return loads(Path(path).read_text(encoding="utf-8"))
