"""Loss components of the MCTL objective and its augmented Lagrangian.

All terms use the projected representations ``A = Phi^T K_S`` (source),
``G = A Z`` (generated target) and ``B = Phi^T K_T`` (true target), and share
the ``1 / n_T**2`` scale so the solver's gradients are exact derivatives of
what is reported here.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from mctl.errors import InputError
from mctl.kernel_graph import AffinityGraph, GramSet
from mctl.state import MCTL, MctlConfig, SolverState


@dataclass(frozen=True)
class LossBreakdown:
    lgdm: float
    ggdm: float
    nuclear: float
    penalty: float
    total: float

    @staticmethod
    def columns() -> tuple:
        return tuple(f.name for f in fields(LossBreakdown))

    def as_tuple(self) -> tuple:
        return astuple(self)


def _check(Phi, Z, grams: GramSet):
    if Phi.ndim != 2 or Phi.shape[0] != grams.n:
        raise InputError(f"Phi must be {grams.n} x d, got {Phi.shape}")
    if Z.shape != (grams.n_S, grams.n_T):
        raise InputError(f"Z must be {grams.n_S} x {grams.n_T}, got {Z.shape}")


def _projected(Phi, Z, grams):
    B = Phi.T @ grams.K_T
    G = (Phi.T @ grams.K_S) @ Z
    return G, B


def lgdm_loss(Phi, Z, grams: GramSet, graph: AffinityGraph) -> float:
    """Manifold-criterion discrepancy between generated and true targets.

    Trace form of ``sum_pq W_pq ||g_p - t_q||^2 / n_T^2``.
    """
    _check(Phi, Z, grams)
    G, B = _projected(Phi, Z, grams)
    deg = np.diag(graph.D)
    quad = np.sum((G * G) @ deg) + np.sum((B * B) @ deg)
    cross = np.sum(G * (B @ graph.W.T))
    return float((quad - 2.0 * cross) / grams.n_T**2)


def laplacian_loss(Phi, Z, grams: GramSet, graph: AffinityGraph) -> float:
    """Perfect-generation manifold term ``2 tr(G L G^T) / n_T^2`` (MCTL-S)."""
    _check(Phi, Z, grams)
    G = (Phi.T @ grams.K_S) @ Z
    return float(2.0 * np.sum(G * (G @ graph.L.T)) / grams.n_T**2)


def ggdm_loss(Phi, Z, grams: GramSet) -> float:
    """Squared norm of the summed projected discrepancy, over ``n_T^2``."""
    _check(Phi, Z, grams)
    G, B = _projected(Phi, Z, grams)
    gap = (G - B).sum(axis=1)
    return float(gap @ gap / grams.n_T**2)


def nuclear_norm(Z) -> float:
    if Z.size == 0:
        return 0.0
    return float(np.linalg.svd(Z, compute_uv=False).sum())


def manifold_term(Phi, Z, grams, graph, cfg: MctlConfig) -> float:
    if not cfg.use_lgdm:
        return 0.0
    if cfg.variant == MCTL:
        return lgdm_loss(Phi, Z, grams, graph)
    return laplacian_loss(Phi, Z, grams, graph)


def smooth_objective(Phi, Z, grams, graph, cfg: MctlConfig) -> float:
    """Manifold + tau * GGDM: the differentiable part of the objective."""
    val = manifold_term(Phi, Z, grams, graph, cfg)
    if cfg.tau_eff:
        val += cfg.tau_eff * ggdm_loss(Phi, Z, grams)
    return val


def penalty_term(Z, J, R1, mu) -> float:
    diff = Z - J
    return float(np.sum(R1 * diff) + 0.5 * mu * np.sum(diff * diff))


def augmented_lagrangian(
    state: SolverState, grams: GramSet, graph: AffinityGraph, cfg: MctlConfig
) -> LossBreakdown:
    Phi, Z = state.Phi, state.Z
    lg = manifold_term(Phi, Z, grams, graph, cfg)
    gg = ggdm_loss(Phi, Z, grams)
    if cfg.use_lrc:
        nuc = nuclear_norm(state.J)
        pen = penalty_term(Z, state.J, state.R1, state.mu)
    else:
        nuc, pen = nuclear_norm(Z), 0.0
    total = lg + cfg.tau_eff * gg + cfg.lambda1_eff * nuc + pen
    return LossBreakdown(lg, gg, nuc, pen, float(total))
