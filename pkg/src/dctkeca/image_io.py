"""Grayscale image loading (PGM), area resampling and dataset manifests."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

MAX_PGM_DEPTH = 65535


class PGMError(ValueError):
    """Raised for unreadable or malformed PGM files."""


class ManifestError(ValueError):
    """Raised for invalid dataset manifests."""


@dataclass(frozen=True)
class GrayImage:
    """Real-valued grayscale image.

    ``pixels`` is a ``(height, width)`` float64 array; ``depth`` is the
    maximum gray value of the source encoding (PGM maxval).
    """

    pixels: np.ndarray
    depth: int = 255

    def __post_init__(self) -> None:
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D grid, got shape {arr.shape}")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int):
    pos = 0
    tokens = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMError("malformed header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def load_pgm(path) -> GrayImage:
    """Read a binary (P5) or ASCII (P2) PGM file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise PGMError(f"missing file: {path}") from None
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"malformed header: unsupported magic {magic!r} in {path}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PGMError(f"malformed header in {path}") from None
    if width < 1 or height < 1 or maxval < 1:
        raise PGMError(f"malformed header: non-positive size or maxval in {path}")
    if maxval > MAX_PGM_DEPTH:
        raise PGMError(f"maxval {maxval} > {MAX_PGM_DEPTH} in {path}")
    n = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < n * dtype.itemsize:
            raise PGMError(f"pixel count mismatch in {path}")
        values = np.frombuffer(raster, dtype=dtype, count=n).astype(np.float64)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) != n:
            raise PGMError(
                f"pixel count mismatch in {path}: header says {n}, found {len(body)}")
        values = np.array([int(v) for v in body], dtype=np.float64)

    if values.max(initial=0) > maxval:
        raise PGMError(f"pixel value exceeds maxval in {path}")
    return GrayImage(values.reshape(height, width), depth=maxval)


def write_pgm(path, img: GrayImage, binary: bool = True) -> None:
    """Write ``img`` as PGM; pixel values are rounded and clipped to [0, depth]."""
    values = np.clip(np.rint(img.pixels), 0, img.depth)
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.depth}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            dtype = ">u2" if img.depth > 255 else "u1"
            fh.write(values.astype(dtype).tobytes())
        else:
            for row in values.astype(np.int64):
                fh.write((" ".join(map(str, row)) + "\n").encode("ascii"))


def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) matrix of fractional-coverage averaging weights."""
    edges = np.arange(n_out + 1) * (n_in / n_out)
    lo = np.arange(n_in)
    # overlap of output cell [e_k, e_k+1) with input pixel [j, j+1)
    overlap = (np.minimum(edges[1:, None], lo[None, :] + 1)
               - np.maximum(edges[:-1, None], lo[None, :]))
    w = np.clip(overlap, 0.0, None)
    return w / w.sum(axis=1, keepdims=True)


def downsample(img: GrayImage, target_w: int, target_h: int) -> GrayImage:
    """Area-average (exact box filter) resample to ``target_w`` x ``target_h``."""
    if target_w < 1 or target_h < 1:
        raise ValueError("target dimensions must be positive")
    if target_w > img.width or target_h > img.height:
        raise ValueError(
            f"target {target_w}x{target_h} exceeds source {img.width}x{img.height}")
    if (target_w, target_h) == (img.width, img.height):
        return img
    rows = _box_weights(img.height, target_h)
    cols = _box_weights(img.width, target_w)
    return GrayImage(rows @ img.pixels @ cols.T, depth=img.depth)


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    subject_id: str
    index: int


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        entries = tuple(sorted(self.entries, key=lambda e: (e.subject_id, e.index)))
        seen = set()
        for e in entries:
            if e.index < 1:
                raise ManifestError(f"non-positive index {e.index} for subject {e.subject_id}")
            key = (e.subject_id, e.index)
            if key in seen:
                raise ManifestError(f"duplicate index {e.index} for subject {e.subject_id}")
            seen.add(key)
        for subject in {e.subject_id for e in entries}:
            idx = sorted(e.index for e in entries if e.subject_id == subject)
            if idx != list(range(1, len(idx) + 1)):
                raise ManifestError(f"indices for subject {subject} are not contiguous from 1")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def subjects(self) -> List[str]:
        return sorted({e.subject_id for e in self.entries})

    def by_subject(self) -> dict:
        groups: dict = {}
        for e in self.entries:
            groups.setdefault(e.subject_id, []).append(e)
        return groups


def load_manifest(path) -> DatasetManifest:
    """Parse a ``path,subject_id,index`` CSV.

    Relative image paths are resolved against the manifest's directory.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ManifestError(f"empty manifest: {path}")
        if [h.strip() for h in header] != ["path", "subject_id", "index"]:
            raise ManifestError(f"manifest header must be 'path,subject_id,index' in {path}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            p, subject, index = (c.strip() for c in row)
            try:
                index = int(index)
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: index {index!r} is not an integer") from None
            if index < 1:
                raise ManifestError(f"{path}:{lineno}: non-positive index {index}")
            img_path = Path(p)
            if not img_path.is_absolute():
                img_path = path.parent / img_path
            entries.append(ManifestEntry(img_path, subject, index))
    if not entries:
        raise ManifestError(f"empty manifest: {path}")
    return DatasetManifest(tuple(entries))


def write_manifest(path, entries: Iterable[ManifestEntry]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "subject_id", "index"])
        for e in entries:
            w.writerow([str(e.path), e.subject_id, e.index])


def scan_orl_directory(root) -> DatasetManifest:
    """Build a manifest from the AT&T/ORL layout ``s<k>/<i>.pgm``."""
    root = Path(root)
    entries = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for img in subject_dir.glob("*.pgm"):
            if img.stem.isdigit():
                entries.append(ManifestEntry(img, subject_dir.name, int(img.stem)))
    if not entries:
        raise ManifestError(f"no <subject>/<n>.pgm files under {root}")
    return DatasetManifest(tuple(entries))


def load_images(entries: Sequence[ManifestEntry]) -> List[GrayImage]:
    return [load_pgm(e.path) for e in entries]
