import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mctl.data import Dataset
from mctl.errors import ConfigError, InputError
from mctl.kernel_graph import AffinityGraph, KernelSpec, build_gram_set, gram, knn_graph


def test_linear_gram_identity():
    X = Dataset(np.eye(2))
    np.testing.assert_array_equal(gram(X, X, KernelSpec("linear")), np.eye(2))


def test_gaussian_gram_values():
    x = Dataset(np.array([[0.0]]))
    y = Dataset(np.array([[2.0]]))
    spec = KernelSpec("gaussian", 1.0)
    assert gram(x, x, spec)[0, 0] == 1.0
    assert gram(x, y, spec)[0, 0] == pytest.approx(np.exp(-2.0), rel=1e-12)
    assert gram(x, y, spec)[0, 0] == pytest.approx(0.135335, abs=1e-6)


def test_gram_errors():
    with pytest.raises(InputError):
        gram(Dataset(np.zeros((2, 3))), Dataset(np.zeros((3, 3))), KernelSpec())
    with pytest.raises(ConfigError):
        gram(Dataset(np.zeros((2, 3))), Dataset(np.zeros((2, 3))), KernelSpec("gaussian", 0.0))
    with pytest.raises(ConfigError):
        KernelSpec("polynomial").validate()


def test_gram_set_shapes():
    gs = build_gram_set(Dataset(np.array([[1.0], [2.0]])), Dataset(np.array([[0.0], [1.0]])), KernelSpec())
    assert gs.K.shape == (2, 2) and gs.K_S.shape == (2, 1) and gs.K_T.shape == (2, 1)
    assert gs.n == 2


def test_gram_set_identical_domains(rng):
    X = Dataset(rng.standard_normal((3, 4)))
    gs = build_gram_set(X, X, KernelSpec("gaussian", 1.3))
    np.testing.assert_array_equal(gs.K_S, gs.K_T)


@pytest.mark.parametrize("kind", ["linear", "gaussian"])
def test_gram_set_slices_reassemble(rng, kind):
    X_S, X_T = Dataset(rng.standard_normal((4, 3))), Dataset(rng.standard_normal((4, 2)))
    spec = KernelSpec(kind, 0.9)
    gs = build_gram_set(X_S, X_T, spec)
    np.testing.assert_array_equal(np.hstack([gs.K_S, gs.K_T]), gs.K)
    np.testing.assert_array_equal(gs.K[:, :3], gs.K_S)
    pool = Dataset(np.hstack([X_S.features, X_T.features]))
    np.testing.assert_allclose(gs.K, gram(pool, pool, spec), atol=1e-14)
    assert np.max(np.abs(gs.K - gs.K.T)) <= 1e-12
    assert np.linalg.eigvalsh(gs.K).min() >= -1e-8


def test_gram_set_empty_domain():
    with pytest.raises(InputError):
        build_gram_set(Dataset(np.zeros((2, 0))), Dataset(np.zeros((2, 3))), KernelSpec())


def test_knn_worked_example():
    g = knn_graph(Dataset(np.array([[0.0, 0.1, 5.0]])), 1)
    np.testing.assert_array_equal(g.W, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    np.testing.assert_array_equal(g.D, np.diag([1, 2, 1]))
    np.testing.assert_array_equal(g.L, g.D - g.W)


def test_knn_complete_graph(rng):
    X = Dataset(rng.standard_normal((2, 7)))
    g = knn_graph(X, 6)
    np.testing.assert_array_equal(g.W, np.ones((7, 7)) - np.eye(7))


def test_knn_ties_lower_index():
    # 1 is equidistant from 0 and 2; with k=1 it picks 0
    g = knn_graph(Dataset(np.array([[0.0, 1.0, 2.0]])), 1)
    assert g.W[1, 0] == 1 and g.W[1, 2] == 1  # 2 -> 1 symmetrizes the second edge
    g = knn_graph(Dataset(np.array([[0.0, 1.0, 2.0, 10.0]])), 1)
    np.testing.assert_array_equal(g.W[1], [1, 0, 1, 0])


def test_knn_k_out_of_range(rng):
    X = Dataset(rng.standard_normal((2, 4)))
    with pytest.raises(ConfigError):
        knn_graph(X, 4)
    with pytest.raises(ConfigError):
        knn_graph(X, 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 14), k=st.integers(1, 5))
def test_graph_invariants(seed, n, k):
    k = min(k, n - 1)
    X = Dataset(np.random.default_rng(seed).standard_normal((3, n)))
    g = knn_graph(X, k)
    assert set(np.unique(g.W)) <= {0.0, 1.0}
    np.testing.assert_array_equal(g.W, g.W.T)
    assert np.all(np.diag(g.W) == 0)
    np.testing.assert_array_equal(np.diag(g.D), g.W.sum(axis=1))
    np.testing.assert_array_equal(g.L @ np.ones(n), np.zeros(n))
    assert np.all(g.W.sum(axis=1) >= k)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), sigma=st.floats(0.5, 10.0))
# narrower bandwidths underflow exp() to exactly 0 for distant points
def test_gaussian_gram_range(seed, sigma):
    X = Dataset(np.random.default_rng(seed).standard_normal((3, 6)))
    K = gram(X, X, KernelSpec("gaussian", sigma))
    np.testing.assert_array_equal(np.diag(K), np.ones(6))
    assert np.all(K > 0) and np.all(K <= 1)


def test_linear_gram_centered_rowsum(rng):
    X = rng.standard_normal((4, 9))
    X -= X.mean(axis=1, keepdims=True)
    K = gram(Dataset(X), Dataset(X), KernelSpec())
    assert np.max(np.abs(K.sum(axis=1))) <= 1e-9 * 9 * np.max(np.abs(K))


def test_affinity_from_adjacency():
    g = AffinityGraph.from_adjacency(np.array([[0, 1], [1, 0]]), 1)
    np.testing.assert_array_equal(g.L, [[1, -1], [-1, 1]])
