"""Kernel Gram matrices over the pooled domains and the target kNN graph."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mctl import _backend
from mctl.data import Dataset
from mctl.errors import ConfigError, InputError

LINEAR = "linear"
GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    kind: str = LINEAR
    sigma: float = 1.0

    def validate(self) -> None:
        if self.kind not in (LINEAR, GAUSSIAN):
            raise ConfigError(f"unknown kernel {self.kind!r}")
        if self.kind == GAUSSIAN and not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigError(f"Gaussian kernel needs sigma > 0, got {self.sigma}")


@dataclass(frozen=True)
class GramSet:
    """``K`` over the pool ``[X_S, X_T]`` plus its source/target column blocks."""

    K: np.ndarray
    K_S: np.ndarray
    K_T: np.ndarray
    n_S: int
    n_T: int

    @property
    def n(self) -> int:
        return self.n_S + self.n_T


@dataclass(frozen=True)
class AffinityGraph:
    W: np.ndarray
    D: np.ndarray
    L: np.ndarray
    k: int

    @classmethod
    def from_adjacency(cls, W, k: int) -> "AffinityGraph":
        W = np.asarray(W, dtype=np.float64)
        D = np.diag(W.sum(axis=1))
        return cls(W, D, D - W, k)

    @classmethod
    def empty(cls, n: int) -> "AffinityGraph":
        """Edge-free graph, used when the manifold term is ablated."""
        return cls.from_adjacency(np.zeros((n, n)), 0)


def _features(x) -> np.ndarray:
    return x.features if isinstance(x, Dataset) else np.asarray(x, dtype=np.float64)


def gram(pool, part, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix ``[k(pool_i, part_j)]``; inputs are datasets or m x n arrays."""
    spec.validate()
    A, B = _features(pool), _features(part)
    if A.shape[0] != B.shape[0]:
        raise InputError(f"feature dimension mismatch: {A.shape[0]} vs {B.shape[0]}")
    if spec.kind == LINEAR:
        return A.T @ B
    return _backend.gaussian_gram(A, B, float(spec.sigma))


def build_gram_set(X_S: Dataset, X_T: Dataset, spec: KernelSpec) -> GramSet:
    if X_S.n_samples == 0 or X_T.n_samples == 0:
        raise InputError("both domains need at least one sample")
    if X_S.n_features != X_T.n_features:
        raise InputError(
            f"source has {X_S.n_features} features, target has {X_T.n_features}"
        )
    X = np.hstack([X_S.features, X_T.features])
    K = gram(X, X, spec)
    K = 0.5 * (K + K.T)
    n_S = X_S.n_samples
    return GramSet(K, K[:, :n_S], K[:, n_S:], n_S, X_T.n_samples)


def knn_graph(X_T, k: int) -> AffinityGraph:
    """Symmetric (OR-rule) kNN graph over the columns of ``X_T``.

    Euclidean distance, self excluded, equal distances resolved toward the
    lower sample index.
    """
    X = _features(X_T)
    n = X.shape[1]
    if not 1 <= k < n:
        raise ConfigError(f"k must satisfy 1 <= k < n_T = {n}, got {k}")
    W = _backend.knn_adjacency(np.ascontiguousarray(X), int(k))
    return AffinityGraph.from_adjacency(W, int(k))


def bipartite_knn_graph(generated: np.ndarray, target: np.ndarray, k: int) -> AffinityGraph:
    """Graph linking generated sample p and true target q when either is among
    the other's k nearest in the opposite set; symmetrized, self-pairs dropped.
    """
    n = target.shape[1]
    if not 1 <= k < n:
        raise ConfigError(f"k must satisfy 1 <= k < n_T = {n}, got {k}")
    D = _backend.sq_dists(np.ascontiguousarray(generated), np.ascontiguousarray(target))
    W = np.zeros((n, n), dtype=np.uint8)
    for p in range(n):
        W[p, np.argsort(D[p], kind="stable")[:k]] = 1  # targets near generated p
    for q in range(n):
        W[np.argsort(D[:, q], kind="stable")[:k], q] = 1  # generated near target q
    W = W | W.T
    np.fill_diagonal(W, 0)
    return AffinityGraph.from_adjacency(W, int(k))
