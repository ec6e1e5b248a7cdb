"""Embedded invariant checks behind ``dctkeca selftest``."""

from __future__ import annotations

import numpy as np

from .dct import dct2, idct2
from .keca import eigendecompose, entropy_contributions, renyi_estimate
from .kernels import KernelConfig, arc_cosine_kernel, gram_matrix
from .oracles import arccos_kernel_mc, dct2_direct


def _dct_roundtrip(rng) -> str:
    worst = 0.0
    for shape in ((8, 8), (37, 29)):
        x = rng.random(shape) * 255
        worst = max(worst, float(np.abs(idct2(dct2(x)) - x).max()))
    assert worst < 1e-9, f"round-trip error {worst:.2e}"
    x = rng.random((8, 8))
    err = float(np.abs(dct2(x) - dct2_direct(x)).max())
    assert err < 1e-10, f"direct-summation mismatch {err:.2e}"
    return f"round trip {worst:.1e}, vs direct sum {err:.1e}"


def _spectral_identity(rng) -> str:
    worst = 0.0
    for _ in range(10):
        X = rng.normal(size=(int(rng.integers(2, 40)), 5))
        K = gram_matrix(X, KernelConfig("arccos", 2, standardize=False))
        es = eigendecompose(K)
        worst = max(worst, abs(renyi_estimate(K)[0] - entropy_contributions(es, len(K)).sum()))
    assert worst < 1e-10, f"potential vs spectral sum {worst:.2e}"
    return f"max |V - sum c| {worst:.1e}"


def _kernel_mc(rng) -> str:
    worst = 0.0
    for n in (0, 1, 2):
        x, y = rng.normal(size=3), rng.normal(size=3)
        ref = arc_cosine_kernel(x, y, n)
        est, _ = arccos_kernel_mc(x, y, n, samples=1 << 17)
        worst = max(worst, abs(est - ref) / ref)
    assert worst < 0.05, f"Monte-Carlo relative error {worst:.3f}"
    return f"max relative error {worst:.4f}"


CHECKS = (
    ("dct round trip", _dct_roundtrip),
    ("renyi spectral identity", _spectral_identity),
    ("arc-cosine monte carlo", _kernel_mc),
)


def run_selftest(emit=print) -> int:
    rng = np.random.default_rng(20240601)
    failures = 0
    for name, check in CHECKS:
        try:
            emit(f"PASS {name}: {check(rng)}")
        except AssertionError as exc:
            failures += 1
            emit(f"FAIL {name}: {exc}")
    return failures
