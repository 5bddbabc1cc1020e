"""Brute-force reference computations for checking the solver on small inputs.

None of these share code with the routines they verify: the LGDM oracle is a
literal double loop, SVT goes through an eigen-decomposition of ``S^T S``
instead of an SVD, and eigen residuals are measured on the dense problem.
"""
from __future__ import annotations

from typing import Callable

import numpy as np


def fd_gradient(loss_fn: Callable[[np.ndarray], float], Z, h=None) -> np.ndarray:
    """Central-difference gradient of a scalar function of a matrix.

    ``h`` is either a positive scalar or ``None`` for the adaptive per-entry
    step ``1e-5 * (1 + |Z_ij|)``.
    """
    Z = np.array(Z, dtype=np.float64)
    if h is not None and not h > 0:
        raise ValueError("h must be > 0")
    grad = np.zeros_like(Z)
    for idx in np.ndindex(*Z.shape):
        step = 1e-5 * (1.0 + abs(Z[idx])) if h is None else h
        orig = Z[idx]
        Z[idx] = orig + step
        up = loss_fn(Z.copy())
        Z[idx] = orig - step
        down = loss_fn(Z.copy())
        Z[idx] = orig
        grad[idx] = (up - down) / (2.0 * step)
    return grad


def lgdm_pairwise(generated, target, W) -> float:
    """``sum_pq W_pq ||g_p - t_q||^2 / n_T^2`` by explicit enumeration."""
    G = np.asarray(generated, dtype=np.float64)
    T = np.asarray(target, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    n_T = T.shape[1]
    if G.shape[1] != n_T or W.shape != (n_T, n_T):
        raise ValueError(f"shape mismatch: G {G.shape}, T {T.shape}, W {W.shape}")
    total = 0.0
    for p in range(n_T):
        for q in range(n_T):
            if W[p, q] != 0.0:
                diff = G[:, p] - T[:, q]
                total += W[p, q] * float(diff @ diff)
    return total / n_T**2


def svt_reference(S, threshold: float) -> np.ndarray:
    """Soft-threshold the singular values of ``S`` via ``eigh(S^T S)``.

    With ``S^T S = V diag(s^2) V^T`` the thresholded matrix is
    ``S V diag(max(s - t, 0) / s) V^T``; directions with ``s = 0`` drop out.
    """
    S = np.asarray(S, dtype=np.float64)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    if threshold == 0:
        return S.copy()
    evals, V = np.linalg.eigh(S.T @ S)
    s = np.sqrt(np.clip(evals, 0.0, None))
    shrink = np.zeros_like(s)
    keep = s > threshold
    shrink[keep] = (s[keep] - threshold) / s[keep]
    return S @ (V * shrink) @ V.T


def svt_objective(J, S, threshold: float) -> float:
    """``t ||J||_* + 1/2 ||J - S||_F^2``: the SVT subproblem scaled by ``1/mu``."""
    nuc = np.sqrt(np.clip(np.linalg.eigvalsh(J.T @ J), 0.0, None)).sum()
    return float(threshold * nuc + 0.5 * np.sum((J - S) ** 2))


def geneig_residuals(M, K, V, lam) -> np.ndarray:
    """Per-column ``||M v - lam K v||`` for a claimed generalized eigenbasis."""
    M, K, V = (np.asarray(a, dtype=np.float64) for a in (M, K, V))
    R = M @ V - (K @ V) * np.asarray(lam)[None, :]
    return np.linalg.norm(R, axis=0)


def geneig_dense(M, K):
    """All generalized eigenpairs via the Cholesky reduction ``L^-1 M L^-T``."""
    C = np.linalg.cholesky(K)
    Ci = np.linalg.inv(C)
    lam, U = np.linalg.eigh(Ci @ M @ Ci.T)
    return lam, Ci.T @ U
