import numpy as np
import pytest
import scipy.linalg

from mctl import oracle
from mctl.solver import svt


def test_fd_quadratic(rng):
    Z = rng.standard_normal((3, 4))
    g = oracle.fd_gradient(lambda A: float(np.sum(A * A)), Z, h=1e-5)
    np.testing.assert_allclose(g, 2 * Z, atol=1e-8)


def test_fd_constant(rng):
    Z = rng.standard_normal((2, 2))
    np.testing.assert_array_equal(oracle.fd_gradient(lambda A: 3.0, Z), np.zeros((2, 2)))


def test_fd_rejects_bad_step():
    with pytest.raises(ValueError):
        oracle.fd_gradient(lambda A: 0.0, np.zeros((1, 1)), h=0.0)


def test_fd_leaves_input_untouched(rng):
    Z = rng.standard_normal((2, 3))
    before = Z.copy()
    oracle.fd_gradient(lambda A: float(A.sum()), Z)
    np.testing.assert_array_equal(Z, before)


def test_lgdm_pairwise_cases(rng):
    T = np.array([[0.0, 1.0]])
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert oracle.lgdm_pairwise(T, T, W) == pytest.approx(2.0 / 4)
    G = rng.standard_normal((3, 5))
    assert oracle.lgdm_pairwise(G, rng.standard_normal((3, 5)), np.zeros((5, 5))) == 0.0
    with pytest.raises(ValueError):
        oracle.lgdm_pairwise(G, G, np.zeros((4, 4)))


def test_svt_reference_cases(rng):
    S = rng.standard_normal((4, 3))
    np.testing.assert_array_equal(oracle.svt_reference(S, 0.0), S)
    u = rng.standard_normal(4)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    R = np.outer(u, v)
    np.testing.assert_allclose(oracle.svt_reference(3 * R, 1.0), 2 * R, atol=1e-12)
    big = np.linalg.norm(S, 2) + 0.1
    np.testing.assert_allclose(oracle.svt_reference(S, big), 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        oracle.svt_reference(S, -1.0)


@pytest.mark.parametrize("shape", [(5, 5), (6, 3), (3, 6)])
def test_svt_reference_agrees_with_solver(rng, shape):
    for t in (0.1, 1.0, 10.0):
        S = rng.standard_normal(shape) * 3
        assert np.linalg.norm(oracle.svt_reference(S, t) - svt(S, t)) <= 1e-9


def test_geneig_dense_and_residuals(rng):
    A = rng.standard_normal((6, 6))
    M = A + A.T
    C = rng.standard_normal((6, 6))
    K = C @ C.T + 6 * np.eye(6)
    lam, V = oracle.geneig_dense(M, K)
    assert np.max(oracle.geneig_residuals(M, K, V, lam)) <= 1e-9
    np.testing.assert_allclose(lam, scipy.linalg.eigh(M, K, eigvals_only=True), atol=1e-10)
