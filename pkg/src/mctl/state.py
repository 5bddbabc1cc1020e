"""Hyperparameters and live optimization state for the MCTL solvers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from mctl.errors import ConfigError
from mctl.kernel_graph import KernelSpec

MCTL = "mctl"
MCTL_S = "mctl-s"
VARIANTS = (MCTL, MCTL_S)

DROP_LGDM = "lgdm"
DROP_GGDM = "ggdm"
DROP_LRC = "lrc"
ABLATIONS = (DROP_LGDM, DROP_GGDM, DROP_LRC)


@dataclass(frozen=True)
class MctlConfig:
    """Solver hyperparameters.

    ``dim=None`` keeps the full subspace (d = n). ``ablation`` names the loss
    terms to remove: ``"lgdm"`` (manifold term), ``"ggdm"`` (tau -> 0) and
    ``"lrc"`` (lambda1 -> 0, no auxiliary J / multiplier / penalty).
    ``eig_ridge`` is relative: the Gram matrix gets ``eig_ridge * tr(K) / n``
    added to its diagonal before the generalized eigen-solve.
    """

    tau: float = 1.0
    lambda1: float = 1.0
    k_neighbors: int = 5
    dim: Optional[int] = None
    kernel: KernelSpec = field(default_factory=KernelSpec)
    step_alpha: float = 1e-3
    inner_z_steps: int = 1
    max_halvings: int = 20
    mu0: float = 0.1
    mu_max: float = 1e6
    mu_growth: float = 1.01
    max_outer_iters: int = 15
    tol_rel: float = 1e-5
    variant: str = MCTL
    ablation: frozenset = frozenset()
    eig_ridge: float = 1e-6
    recompute_affinity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ablation", frozenset(self.ablation))
        if isinstance(self.kernel, dict):
            object.__setattr__(self, "kernel", KernelSpec(**self.kernel))

    def validate(self, n: Optional[int] = None) -> None:
        self.kernel.validate()
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        unknown = self.ablation - set(ABLATIONS)
        if unknown:
            raise ConfigError(f"unknown ablation(s) {sorted(unknown)}; choose from {ABLATIONS}")
        for name in ("tau", "lambda1"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be finite and >= 0, got {v}")
        if not self.step_alpha > 0:
            raise ConfigError("step_alpha must be > 0")
        if not self.mu0 > 0:
            raise ConfigError("mu0 must be > 0")
        if not self.mu_growth > 1:
            raise ConfigError("mu_growth must be > 1")
        if not self.mu0 <= self.mu_max:
            raise ConfigError("mu0 must not exceed mu_max")
        if not self.tol_rel > 0:
            raise ConfigError("tol_rel must be > 0")
        if self.max_outer_iters < 0 or self.inner_z_steps < 1 or self.max_halvings < 0:
            raise ConfigError("iteration counts must be non-negative (inner_z_steps >= 1)")
        if self.k_neighbors < 1:
            raise ConfigError("k_neighbors must be >= 1")
        if not self.eig_ridge >= 0:
            raise ConfigError("eig_ridge must be >= 0")
        if self.dim is not None:
            if self.dim < 1 or (n is not None and self.dim > n):
                raise ConfigError(f"dim must satisfy 1 <= d <= n ({n}), got {self.dim}")

    @property
    def use_lgdm(self) -> bool:
        return DROP_LGDM not in self.ablation

    @property
    def use_lrc(self) -> bool:
        return DROP_LRC not in self.ablation

    @property
    def tau_eff(self) -> float:
        return 0.0 if DROP_GGDM in self.ablation else float(self.tau)

    @property
    def lambda1_eff(self) -> float:
        return float(self.lambda1) if self.use_lrc else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ablation"] = sorted(self.ablation)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MctlConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown solver config keys: {sorted(extra)}")
        return cls(**d)


@dataclass
class SolverState:
    Phi: np.ndarray
    Z: np.ndarray
    J: np.ndarray
    R1: np.ndarray
    mu: float
    iter: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def initial(cls, n: int, n_S: int, n_T: int, cfg: MctlConfig) -> "SolverState":
        d = n if cfg.dim is None else cfg.dim
        zeros = np.zeros((n_S, n_T))
        return cls(np.zeros((n, d)), zeros, zeros.copy(), zeros.copy(), float(cfg.mu0))
