"""Command-line front end: normalize, extract, fit, classify, evaluate, selftest."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .classifier import classify_batch, fit_classifier
from .config import ConfigError, PipelineConfig, parse_config
from .evaluation import (PipelineError, baseline_raw_pixels, evaluate, extract_dataset,
                         prepare_image, split_ep1, split_loo)
from .illumination import normalize_illumination
from .image_io import GrayImage, load_manifest, load_pgm, write_pgm
from .keca import fit as fit_keca, project
from .persistence import load_model, save_model

log = logging.getLogger("dctkeca")


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")


def _config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        try:
            return parse_config(args.config)
        except OSError as exc:
            raise StageError("config", str(exc)) from None
    return PipelineConfig()


def _manifest(args, cfg: PipelineConfig):
    path = args.manifest or cfg.manifest
    if not path:
        raise StageError("manifest", "no manifest given (--manifest or 'manifest' key)")
    try:
        return load_manifest(path)
    except (OSError, ValueError) as exc:
        raise StageError("manifest", str(exc)) from None


def _rescale_to_gray(x: np.ndarray) -> GrayImage:
    lo, hi = float(x.min()), float(x.max())
    scaled = (x - lo) / (hi - lo) * 255 if hi > lo else np.zeros_like(x)
    return GrayImage(scaled, depth=255)


def cmd_normalize(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.input:
        jobs = [(Path(p), Path(p).stem) for p in args.input]
    else:
        jobs = [(e.path, f"{e.subject_id}_{e.index}") for e in _manifest(args, cfg)]
    for path, stem in jobs:
        try:
            img = prepare_image(load_pgm(path), cfg)
            normalized = normalize_illumination(img.pixels, cfg.illumination)
        except (OSError, ValueError) as exc:
            raise StageError("normalize", f"[{path}] {exc}") from None
        write_pgm(out / f"{stem}.pgm", _rescale_to_gray(normalized))
    log.info("wrote %d normalized image(s) to %s", len(jobs), out)
    return 0


def _read_features(path):
    paths, labels, rows = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["path", "subject_id"]:
            raise StageError("features", f"{path}: header must start with 'path,subject_id'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError:
                raise StageError("features", f"{path}:{lineno}: non-numeric value") from None
            paths.append(row[0])
            labels.append(row[1])
    if not rows or len({len(r) for r in rows}) != 1:
        raise StageError("features", f"{path}: empty or ragged feature table")
    return paths, labels, np.array(rows)


def _write_features(path, entries, X) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "subject_id"] + [f"v{i + 1}" for i in range(X.shape[1])])
        for e, row in zip(entries, X):
            w.writerow([str(e.path), e.subject_id] + [repr(float(v)) for v in row])


def _dataset_features(args, cfg):
    manifest = _manifest(args, cfg)
    X, warnings = extract_dataset(manifest.entries, cfg, args.threads)
    for w in warnings:
        log.warning(w)
    return manifest, X


def cmd_extract(args) -> int:
    cfg = _config(args)
    manifest, X = _dataset_features(args, cfg)
    _write_features(args.out, manifest.entries, X)
    log.info("wrote %d feature rows to %s", len(X), args.out)
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    if args.features:
        _, labels, X = _read_features(args.features)
    else:
        manifest, X = _dataset_features(args, cfg)
        labels = [e.subject_id for e in manifest.entries]
    try:
        model = fit_keca(X, cfg.kernel, cfg.components, cfg.tol_lambda, cfg.tol_one)
        clf = fit_classifier(model.embeddings, labels, cfg.metric, cfg.ridge)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise StageError("fit", str(exc)) from None
    for w in model.warnings:
        log.warning(w)
    save_model(args.out, cfg, model, clf)
    log.info("fitted %d-dim model on %d vectors -> %s", model.dim, len(X), args.out)
    return 0


def cmd_classify(args) -> int:
    try:
        cfg, model, clf = load_model(args.model)
    except (OSError, ValueError) as exc:
        raise StageError("model", str(exc)) from None
    if args.features:
        paths, _, X = _read_features(args.features)
    else:
        manifest, X = _dataset_features(args, cfg)
        paths = [str(e.path) for e in manifest.entries]
    try:
        labels, dists = classify_batch(project(model, X), clf)
    except ValueError as exc:
        raise StageError("classify", str(exc)) from None
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["path", "predicted_label", "distance"])
        for p, lab, d in zip(paths, labels, dists):
            w.writerow([p, lab, repr(float(d))])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    manifest = _manifest(args, cfg)
    try:
        splits = split_ep1(manifest, args.train) if args.protocol == "ep1" else split_loo(manifest)
    except ValueError as exc:
        raise StageError("split", str(exc)) from None
    if args.baseline:
        report = baseline_raw_pixels(manifest, splits, cfg, args.threads)
    else:
        report = evaluate(manifest, splits, cfg, args.threads)
    text = report.to_json()
    out = args.out or cfg.output
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        row = report.csv_row()
        new = not Path(args.csv).exists()
        with open(args.csv, "a", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
            if new:
                w.writeheader()
            w.writerow(row)
    log.info("%s %s accuracy %.4f", report.method, report.protocol, report.accuracy)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    failures = run_selftest(print)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dctkeca",
        description="Log-DCT entropy features + KECA face recognition pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def common(p, manifest=True):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: logical cores)")
        if manifest:
            p.add_argument("--manifest", help="CSV with path,subject_id,index")

    p = sub.add_parser("normalize", help="write illumination-normalized images as PGM")
    common(p)
    p.add_argument("--input", nargs="+", help="PGM files (instead of --manifest)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("extract", help="write entropy-selected DCT features as CSV")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", help="fit KECA + nearest-mean classifier")
    common(p)
    p.add_argument("--features", help="feature CSV (instead of --manifest)")
    p.add_argument("--out", required=True, help="model file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("classify", help="classify images or feature rows with a model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--features", help="feature CSV (instead of --manifest)")
    p.add_argument("--out", help="prediction CSV (default: stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="run an evaluation protocol and write a JSON report")
    common(p)
    p.add_argument("--protocol", choices=("ep1", "loo"), default="ep1")
    p.add_argument("--train", type=int, default=5, help="training images per subject (ep1)")
    p.add_argument("--baseline", action="store_true",
                   help="evaluate the raw-pixel nearest-mean baseline instead")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--csv", help="append a one-line summary to this CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (StageError, PipelineError, ConfigError) as exc:
        print(f"dctkeca: error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
