"""Alternating inexact-ALM solver for MCTL and MCTL-S.

One outer iteration: generalized eigen-solve for the projection ``Phi``,
singular value thresholding for the auxiliary ``J``, a backtracking gradient
step for the generative matrix ``Z``, then the multiplier / penalty update.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from mctl.data import Dataset, concat
from mctl.errors import ConvergenceWarning, InputError, NumericError
from mctl.kernel_graph import (
    AffinityGraph,
    GramSet,
    KernelSpec,
    bipartite_knn_graph,
    build_gram_set,
    gram,
    knn_graph,
)
from mctl.losses import LossBreakdown, augmented_lagrangian, penalty_term, smooth_objective
from mctl.state import MCTL, MCTL_S, MctlConfig, SolverState  # noqa: F401  (re-export)

log = logging.getLogger(__name__)

SOURCE = "source"
GENERATED_TARGET = "generated-target"
NEW_TARGET = "new-target"


@dataclass
class AdaptationModel:
    Phi: np.ndarray
    Z: np.ndarray
    kernel: KernelSpec
    pool: Dataset
    n_S: int
    n_T: int
    grams: GramSet
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    ortho_dev: list = field(default_factory=list)
    ortho_dev_raw: list = field(default_factory=list)
    J: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return len(self.history)


# ---------------------------------------------------------------- Phi update


def phi_matrix(Z, grams: GramSet, graph: AffinityGraph, cfg: MctlConfig) -> np.ndarray:
    """Symmetric n x n matrix whose trace form ``tr(Phi^T M Phi)`` is the
    smooth objective at fixed ``Z``."""
    n_T2 = grams.n_T**2
    KT = grams.K_T
    GS = grams.K_S @ Z  # generated targets in kernel coordinates
    M = np.zeros((grams.n, grams.n))
    if cfg.use_lgdm:
        if cfg.variant == MCTL:
            deg = np.diag(graph.D)
            cross = GS @ graph.W @ KT.T
            M += (GS * deg) @ GS.T + (KT * deg) @ KT.T - cross - cross.T
        else:
            M += 2.0 * (GS @ graph.L @ GS.T)
        M /= n_T2
    if cfg.tau_eff:
        u = (GS - KT).sum(axis=1)
        M += (cfg.tau_eff / n_T2) * np.outer(u, u)
    return 0.5 * (M + M.T)


def ridge_for(K, cfg: MctlConfig) -> float:
    return cfg.eig_ridge * float(np.trace(K)) / K.shape[0]


def solve_phi(M, K, d: int, ridge: float = 0.0):
    """d eigenvectors of ``M v = lam (K + ridge I) v`` with smallest ``lam``,
    normalized to ``v^T (K + ridge I) v = 1``. Returns ``(Phi, lam)``."""
    Kr = K + ridge * np.eye(K.shape[0])
    try:
        lam, V = scipy.linalg.eigh(M, Kr, subset_by_index=[0, d - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(Kr)
        raise NumericError(
            f"generalized eigen-solve failed ({exc}); cond(K + ridge I) = {cond:.3e}, "
            f"ridge = {ridge:.3e}; increase eig_ridge"
        ) from exc
    return V, lam


def update_phi(state: SolverState, grams: GramSet, graph: AffinityGraph, cfg: MctlConfig):
    d = grams.n if cfg.dim is None else cfg.dim
    M = phi_matrix(state.Z, grams, graph, cfg)
    Phi, _ = solve_phi(M, grams.K, d, ridge_for(grams.K, cfg))
    return Phi


def orthogonality_error(Phi, K, ridge: float = 0.0) -> float:
    """``max |Phi^T (K + ridge I) Phi - I|``."""
    P = Phi.T @ K @ Phi + ridge * (Phi.T @ Phi)
    return float(np.max(np.abs(P - np.eye(Phi.shape[1]))))


# ------------------------------------------------------------------ J update


def svt(S, threshold: float):
    U, s, Vt = np.linalg.svd(S, full_matrices=False)
    return (U * np.maximum(s - threshold, 0.0)) @ Vt


def update_j(state: SolverState, cfg: MctlConfig):
    """Proximal step for ``lambda1 ||J||_* + mu/2 ||J - (Z + R1/mu)||_F^2``."""
    if not cfg.use_lrc:
        return state.Z.copy()
    return svt(state.Z + state.R1 / state.mu, cfg.lambda1_eff / state.mu)


# ------------------------------------------------------------------ Z update


def grad_z(state: SolverState, grams: GramSet, graph: AffinityGraph, cfg: MctlConfig):
    """Gradient in Z of the augmented Lagrangian (Phi, J, R1, mu held fixed)."""
    Phi, Z = state.Phi, state.Z
    if Z.shape != (grams.n_S, grams.n_T):
        raise InputError(f"Z must be {grams.n_S} x {grams.n_T}, got {Z.shape}")
    if Phi.shape[0] != grams.n:
        raise InputError(f"Phi must have {grams.n} rows, got {Phi.shape}")
    n_T2 = grams.n_T**2
    A = Phi.T @ grams.K_S
    B = Phi.T @ grams.K_T
    G = A @ Z
    grad = np.zeros_like(Z)
    if cfg.use_lgdm:
        if cfg.variant == MCTL:
            grad += (2.0 / n_T2) * (A.T @ (G @ graph.D - B @ graph.W.T))
        else:
            grad += (2.0 / n_T2) * (A.T @ (G @ (graph.L + graph.L.T)))
    if cfg.tau_eff:
        u = (G - B).sum(axis=1)
        grad += (2.0 * cfg.tau_eff / n_T2) * np.outer(A.T @ u, np.ones(grams.n_T))
    if cfg.use_lrc:
        grad += state.R1 + state.mu * (Z - state.J)
    return grad


def _z_objective(state, Z, grams, graph, cfg):
    val = smooth_objective(state.Phi, Z, grams, graph, cfg)
    if cfg.use_lrc:
        val += penalty_term(Z, state.J, state.R1, state.mu)
    return val


def descend_z(state, grams, graph, cfg):
    """Backtracking gradient descent on Z. Returns ``(Z, stalled)``."""
    Z = state.Z
    alpha = cfg.step_alpha
    probe = SolverState(state.Phi, Z, state.J, state.R1, state.mu)
    for _ in range(cfg.inner_z_steps):
        probe.Z = Z
        g = grad_z(probe, grams, graph, cfg)
        f0 = _z_objective(state, Z, grams, graph, cfg)
        for _halving in range(cfg.max_halvings + 1):
            Z_new = Z - alpha * g
            if _z_objective(state, Z_new, grams, graph, cfg) <= f0:
                Z = Z_new
                break
            alpha *= 0.5
        else:
            return Z, True
    return Z, False


def update_z(state: SolverState, grams: GramSet, graph: AffinityGraph, cfg: MctlConfig):
    Z, stalled = descend_z(state, grams, graph, cfg)
    if stalled:
        warnings.warn(
            f"Z step stalled after {cfg.max_halvings} step halvings", ConvergenceWarning, stacklevel=2
        )
    return Z


# ---------------------------------------------------------------------- fit


def fit(
    X_S: Dataset,
    X_T: Dataset,
    cfg: MctlConfig,
    sink: Optional[Callable[[int, LossBreakdown], None]] = None,
) -> AdaptationModel:
    """Learn ``(Phi, Z)`` from labeled-or-not source and unlabeled target data.

    ``sink`` receives ``(iteration, LossBreakdown)`` after every outer step.
    """
    if X_S.n_samples == 0 or X_T.n_samples == 0:
        raise InputError("both domains need at least one sample")
    if X_S.n_features != X_T.n_features:
        raise InputError(f"source has {X_S.n_features} features, target has {X_T.n_features}")
    n = X_S.n_samples + X_T.n_samples
    cfg.validate(n)
    grams = build_gram_set(X_S, X_T, cfg.kernel)
    graph = knn_graph(X_T, cfg.k_neighbors)
    ridge = ridge_for(grams.K, cfg)
    state = SolverState.initial(grams.n, grams.n_S, grams.n_T, cfg)
    model_warnings: list[str] = []
    ortho, ortho_raw = [], []

    def solve_phi_step():
        state.Phi = update_phi(state, grams, graph, cfg)
        ortho.append(orthogonality_error(state.Phi, grams.K, ridge))
        ortho_raw.append(orthogonality_error(state.Phi, grams.K))

    def record(it):
        lb = augmented_lagrangian(state, grams, graph, cfg)
        state.history.append(lb)
        if sink is not None:
            sink(it, lb)
        return lb

    if cfg.max_outer_iters == 0:
        solve_phi_step()
        record(0)
    prev = None
    for it in range(1, cfg.max_outer_iters + 1):
        state.iter = it
        if cfg.recompute_affinity and it > 1:
            graph = bipartite_knn_graph(
                state.Phi.T @ grams.K_S @ state.Z, state.Phi.T @ grams.K_T, cfg.k_neighbors
            )
        solve_phi_step()
        state.J = update_j(state, cfg)
        state.Z, stalled = descend_z(state, grams, graph, cfg)
        if stalled:
            model_warnings.append(f"iteration {it}: Z step stalled")
        if cfg.use_lrc:
            state.R1 = state.R1 + state.mu * (state.Z - state.J)
            state.mu = min(state.mu * cfg.mu_growth, cfg.mu_max)
        else:
            state.J = state.Z.copy()
        lb = record(it)
        if prev is not None and abs(lb.total - prev) < cfg.tol_rel * max(abs(prev), 1e-300):
            break
        prev = lb.total

    if cfg.use_lrc:
        gap = float(np.linalg.norm(state.Z - state.J))
        if gap > 1e-3 * max(1.0, float(np.linalg.norm(state.Z))):
            model_warnings.append(f"constraint Z = J not met: ||Z - J||_F = {gap:.3e}")
    for w in model_warnings:
        log.debug(w)

    pool = concat([X_S, X_T], name="pool")
    return AdaptationModel(
        Phi=state.Phi,
        Z=state.Z,
        kernel=cfg.kernel,
        pool=Dataset(pool.features, None, "pool"),
        n_S=grams.n_S,
        n_T=grams.n_T,
        grams=grams,
        history=state.history,
        warnings=model_warnings,
        ortho_dev=ortho,
        ortho_dev_raw=ortho_raw,
        J=state.J,
    )


def project(model: AdaptationModel, samples=None, which: str = NEW_TARGET) -> np.ndarray:
    """Map data into the learned subspace; output is ``d x batch``.

    ``source`` and ``generated-target`` use the training pool and ignore
    ``samples``; ``new-target`` projects arbitrary samples of the training
    dimensionality.
    """
    if which == SOURCE:
        return model.Phi.T @ model.grams.K_S
    if which == GENERATED_TARGET:
        return (model.Phi.T @ model.grams.K_S) @ model.Z
    if which == NEW_TARGET:
        if samples is None:
            raise InputError("new-target projection needs samples")
        return model.Phi.T @ gram(model.pool, samples, model.kernel)
    raise InputError(f"unknown projection {which!r}")

