import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from qptrim.linalg import NotPositiveDefinite, cholesky, spectral_norm, zoh_discretize


def test_cholesky_reconstructs_random_spd():
    rng = np.random.default_rng(7)
    for n in [1, 2, 3, 5, 8, 20]:
        m = rng.normal(size=(n, n))
        a = m.T @ m + (0.3 + rng.random()) * np.eye(n)
        L = cholesky(a)
        assert np.allclose(np.triu(L, 1), 0.0)
        assert np.all(np.diag(L) > 0)
        err = np.abs(L @ L.T - a).max()
        assert err <= 1e-10 * (np.linalg.norm(a, np.inf) + 1)


def test_cholesky_identity():
    assert np.array_equal(cholesky(np.eye(4)), np.eye(4))


def test_cholesky_rejects_semidefinite():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])  # rank 1
    with pytest.raises(NotPositiveDefinite):
        cholesky(a)
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.zeros((3, 3)))
    with pytest.raises(NotPositiveDefinite):
        cholesky(-np.eye(2))


def test_cholesky_rejects_asymmetric():
    with pytest.raises(ValueError):
        cholesky(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_cholesky_pivot_tolerance_boundary():
    # pivot just above the tolerance factors; at/below raises
    base = np.eye(2)
    tol = 1e-10 * (1.0 + 1.0)
    ok = base.copy()
    ok[1, 1] = 10 * tol
    cholesky(ok)
    bad = base.copy()
    bad[1, 1] = 0.5 * tol
    with pytest.raises(NotPositiveDefinite):
        cholesky(bad)


def test_spectral_norm_matches_unit_vector_sweep():
    # sampled directions never exceed the reported norm; polishing the best
    # sample with power iterations (independent of the SVD route) closes the
    # gap to 1e-6 relative
    rng = np.random.default_rng(11)
    for shape in [(2, 2), (3, 2), (2, 3), (3, 3)]:
        a = rng.normal(size=shape)
        s = spectral_norm(a)
        u = rng.normal(size=(1000, shape[1]))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        gains = np.linalg.norm(u @ a.T, axis=1)
        sampled = gains.max()
        assert sampled <= s + 1e-12
        v = u[np.argmax(gains)]
        for _ in range(100):
            v = a.T @ (a @ v)
            v /= np.linalg.norm(v)
        polished = np.linalg.norm(a @ v)
        assert polished <= s + 1e-12
        assert s - polished <= 1e-6 * (1.0 + s)


def test_spectral_norm_edge_cases():
    assert spectral_norm(np.zeros((3, 4))) == 0.0
    assert spectral_norm(np.zeros((1, 1))) == 0.0
    assert spectral_norm([[3.0]]) == 3.0
    # rank-1: norm is the product of the factor norms
    a = np.outer([1.0, 2.0], [3.0, 4.0])
    assert np.isclose(spectral_norm(a), np.sqrt(5) * 5)


def test_zoh_double_integrator_closed_form():
    ac = np.array([[0.0, 1.0], [0.0, 0.0]])
    bc = np.array([[0.0], [1.0]])
    a, b = zoh_discretize(ac, bc, 0.1)
    assert np.allclose(a, [[1.0, 0.1], [0.0, 1.0]], atol=1e-12)
    assert np.allclose(b, [[0.005], [0.1]], atol=1e-12)


def test_zoh_scalar_decay_closed_form():
    a, b = zoh_discretize([[-1.0]], [[1.0]], 1.0)
    assert np.isclose(a[0, 0], np.exp(-1.0), atol=1e-12)
    assert np.isclose(b[0, 0], 1.0 - np.exp(-1.0), atol=1e-12)


def test_zoh_matches_expm_quadrature_on_random_systems():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n, m = rng.integers(1, 5), rng.integers(1, 3)
        ac = rng.normal(size=(n, n))
        bc = rng.normal(size=(n, m))
        h = float(rng.uniform(0.01, 0.5))
        a, b = zoh_discretize(ac, bc, h)
        assert np.allclose(a, scipy.linalg.expm(ac * h), atol=1e-10)
        # B = int_0^h expm(ac s) ds @ bc, via fine Simpson quadrature
        s = np.linspace(0.0, h, 201)
        vals = np.stack([scipy.linalg.expm(ac * si) @ bc for si in s])
        integral = scipy.integrate.simpson(vals, x=s, axis=0)
        assert np.allclose(b, integral, atol=1e-8)


def test_zoh_stable_continuous_gives_stable_discrete():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        m = rng.normal(size=(n, n))
        shift = max(np.linalg.eigvals(m).real.max(), 0.0) + rng.uniform(0.2, 1.0)
        ac = m - shift * np.eye(n)
        a, _ = zoh_discretize(ac, rng.normal(size=(n, 1)), float(rng.uniform(0.05, 1.0)))
        assert np.abs(np.linalg.eigvals(a)).max() < 1.0


def test_zoh_rejects_bad_input():
    with pytest.raises(ValueError):
        zoh_discretize(np.zeros((2, 3)), np.zeros((2, 1)), 0.1)
    with pytest.raises(ValueError):
        zoh_discretize(np.zeros((2, 2)), np.zeros((3, 1)), 0.1)
    with pytest.raises(ValueError):
        zoh_discretize(np.zeros((2, 2)), np.zeros((2, 1)), 0.0)
