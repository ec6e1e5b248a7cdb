import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dctkeca.keca import (EigenSystem, NotPSDError, eigendecompose, entropy_contributions,
                          fit, project, renyi_estimate, select_axes)
from dctkeca.kernels import KernelConfig, gram_matrix

RBF = KernelConfig("rbf", sigma=1.0, standardize=False)


def _random_psd(rng, n):
    B = rng.normal(size=(n, int(rng.integers(1, n + 3))))
    return B @ B.T


def synthesized_gram():
    """3x3 Gram with a smaller-eigenvalue axis of larger entropy contribution."""
    u = np.ones(3) / math.sqrt(3)
    v = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    w = np.array([1.0, 1.0, -2.0]) / math.sqrt(6)
    phi = math.pi / 3
    e1 = math.cos(phi) * u + math.sin(phi) * w     # (e.1)^2 = 0.75
    e2 = -math.sin(phi) * u + math.cos(phi) * w    # (e.1)^2 = 2.25
    E = np.column_stack([e1, e2, v])
    K = E @ np.diag([2.0, 1.0, 0.5]) @ E.T
    return (K + K.T) / 2, e1, e2


def test_identity_spectrum():
    es = eigendecompose(np.eye(3))
    np.testing.assert_allclose(es.eigenvalues, 1.0)


def test_all_ones_rank_one():
    es = eigendecompose(np.ones((4, 4)))
    np.testing.assert_allclose(es.eigenvalues, [4, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(es.eigenvectors[:, 0], 0.5)


def test_eigensystem_invariants():
    rng = np.random.default_rng(0)
    K = _random_psd(rng, 10)
    es = eigendecompose(K)
    E, lam = es.eigenvectors, es.eigenvalues
    assert (np.diff(lam) <= 0).all()
    np.testing.assert_allclose(np.linalg.norm(E, axis=0), 1, atol=1e-10)
    assert np.abs(E.T @ E - np.eye(10)).max() < 1e-8
    assert np.abs(K - E @ np.diag(lam) @ E.T).max() < 1e-8 * lam.max()
    assert (E.sum(axis=0) >= -1e-10).all()


def test_non_symmetric_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_contributions_closed_forms():
    c = entropy_contributions(eigendecompose(np.ones((5, 5))), 5)
    assert c[0] == pytest.approx(1.0)
    np.testing.assert_allclose(c[1:], 0, atol=1e-12)
    assert entropy_contributions(eigendecompose(np.eye(4)), 4).sum() == pytest.approx(0.25)
    k = 0.3
    es = eigendecompose(np.array([[1, k], [k, 1]]))
    c = entropy_contributions(es, 2)
    assert c[0] == pytest.approx((1 + k) / 2)
    assert c[1] == pytest.approx(0.0, abs=1e-15)


def test_not_psd_rejected():
    with pytest.raises(NotPSDError):
        entropy_contributions(eigendecompose(np.diag([1.0, -0.1])), 2)
    # tiny negative rounding is clamped
    c = entropy_contributions(EigenSystem(np.array([1.0, -1e-12]), np.eye(2)), 2)
    assert c[1] == 0


def test_renyi_estimate_examples():
    assert renyi_estimate(np.ones((3, 3))) == (1.0, 0.0)
    V, H = renyi_estimate(np.eye(6))
    assert V == pytest.approx(1 / 6) and H == pytest.approx(math.log(6))
    with pytest.raises(ValueError):
        renyi_estimate(-np.ones((2, 2)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(0, 10 ** 6))
def test_spectral_identity(n, seed):
    K = _random_psd(np.random.default_rng(seed), n)
    es = eigendecompose(K)
    assert abs(renyi_estimate(K)[0] - entropy_contributions(es, n).sum()) < 1e-10 * max(1, K.max())


def test_select_two_point_excludes_antisymmetric_axis():
    axes = select_axes(eigendecompose(np.array([[1, 0.4], [0.4, 1]])), 2)
    assert len(axes) == 1
    np.testing.assert_allclose(axes[0].eigenvector, [1 / math.sqrt(2)] * 2)


def test_select_all_ones_single_axis():
    assert len(select_axes(eigendecompose(np.ones((4, 4))), 3)) == 1


def test_select_entropy_order_differs_from_eigen_order():
    K, e1, e2 = synthesized_gram()
    axes = select_axes(eigendecompose(K), 3)
    assert len(axes) == 2
    assert axes[0].eigenvalue == pytest.approx(1.0) and axes[1].eigenvalue == pytest.approx(2.0)
    assert axes[0].contribution == pytest.approx(0.25)
    assert axes[1].contribution == pytest.approx(1 / 6)
    np.testing.assert_allclose(np.abs(axes[0].eigenvector @ e2), 1, atol=1e-10)


def test_select_soundness_and_ordering():
    rng = np.random.default_rng(5)
    for _ in range(20):
        K = gram_matrix(rng.normal(size=(15, 3)), KernelConfig("arccos", 1))
        es = eigendecompose(K)
        axes = select_axes(es, 10)
        lam_max = es.eigenvalues.max()
        for a in axes:
            assert a.eigenvalue > 1e-12 * lam_max and abs(a.eigenvector.sum()) > 1e-10
        c = [a.contribution for a in axes]
        assert c == sorted(c, reverse=True)


def test_select_requires_an_axis():
    with pytest.raises(ValueError):
        select_axes(eigendecompose(np.zeros((3, 3))), 1)
    with pytest.raises(ValueError):
        select_axes(eigendecompose(np.eye(2)), 0)


@pytest.fixture(scope="module")
def clusters():
    rng = np.random.default_rng(21)
    a = rng.normal([0, 0], 0.3, size=(12, 2))
    b = rng.normal([4, 1], 0.3, size=(12, 2))
    return a[:10], b[:10], a[10:], b[10:]


def _angles(Z):
    return np.arctan2(Z[:, 1], Z[:, 0])


def test_clusters_have_distinct_angular_directions(clusters):
    a, b, _, _ = clusters
    model = fit(np.vstack([a, b]), RBF, m=2)
    assert model.dim == 2
    Z = model.embeddings
    ang_a, ang_b = _angles(Z[:10]), _angles(Z[10:])
    within = max(np.ptp(ang_a), np.ptp(ang_b))
    between = np.abs(ang_a[:, None] - ang_b[None, :]).min()
    assert between > within


def test_held_out_points_land_near_own_cluster(clusters):
    a, b, ha, hb = clusters
    model = fit(np.vstack([a, b]), RBF, m=2)
    za, zb = _angles(model.embeddings[:10]).mean(), _angles(model.embeddings[10:]).mean()
    for pts, own, other in ((ha, za, zb), (hb, zb, za)):
        for ang in _angles(project(model, pts)):
            assert abs(ang - own) < abs(ang - other)


def test_identical_points_reduce_dimension():
    model = fit(np.array([[1.0, 2.0], [1.0, 2.0]]), KernelConfig("rbf"), m=5)
    assert model.dim == 1 and model.warnings
    np.testing.assert_allclose(model.embeddings[0], model.embeddings[1])


def test_rank_one_projection():
    X = np.tile([0.5, -1.0, 2.0], (6, 1))
    model = fit(X, KernelConfig("rbf", sigma=1.0, standardize=False), m=3)
    # e = 1/sqrt(N), lambda = N, k = 1: each point sits at 1; the axis has norm sqrt(N)
    assert project(model, X[0])[0] == pytest.approx(1.0)
    assert np.linalg.norm(model.embeddings[:, 0]) == pytest.approx(math.sqrt(6))


@pytest.mark.parametrize("cfg", [KernelConfig(), KernelConfig("arccos", 0),
                                 KernelConfig("rbf"), KernelConfig("arccos", 1, standardize=False)])
def test_projection_reproduces_training_rows(cfg):
    X = np.random.default_rng(4).normal(size=(30, 8)) * 5 + 1
    model = fit(X, cfg, m=10)
    np.testing.assert_allclose(project(model, X), model.embeddings, atol=1e-8, rtol=0)
    np.testing.assert_allclose(project(model, X[3]), model.embeddings[3], atol=1e-8, rtol=0)
    assert np.isfinite(model.embeddings).all()


def test_partial_reconstruction_residual_decreases():
    X = np.random.default_rng(8).normal(size=(25, 4))
    cfg = KernelConfig("arccos", 2)
    residuals = []
    for m in (1, 3, 6, 12, 25):
        model = fit(X, cfg, m=m)
        K = gram_matrix(model.train, model.kernel)
        Z = model.embeddings
        np.testing.assert_allclose(Z @ Z.T, (model.eigenvectors * model.eigenvalues)
                                   @ model.eigenvectors.T, atol=1e-9 * K.max())
        residuals.append(np.linalg.norm(K - Z @ Z.T))
    assert all(a >= b - 1e-9 for a, b in zip(residuals, residuals[1:]))
    assert residuals[-1] < 1e-6 * np.linalg.norm(K)


def test_fit_validation():
    with pytest.raises(ValueError):
        fit(np.ones((1, 3)))
    with pytest.raises(ValueError):
        fit(np.array([[1.0, np.nan], [0.0, 1.0]]))
    model = fit(np.random.default_rng(0).normal(size=(5, 3)), m=2)
    with pytest.raises(ValueError, match="dimension"):
        project(model, np.zeros(4))
