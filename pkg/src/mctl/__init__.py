"""Kernelized unsupervised domain adaptation with a manifold criterion.

The solver learns a kernel subspace ``Phi`` and a generative matrix ``Z`` that
synthesizes target-like samples from source samples, then classifies target
data in the learned subspace.
"""
from mctl._backend import BACKEND
from mctl.classify import ClassifierModel, evaluate, predict, train_classifier
from mctl.data import Dataset, SyntheticSpec, generate, load_csv, save_csv, standardize
from mctl.errors import ConfigError, ConvergenceWarning, InputError, MctlError, NumericError
from mctl.kernel_graph import AffinityGraph, GramSet, KernelSpec, build_gram_set, gram, knn_graph
from mctl.losses import LossBreakdown, augmented_lagrangian, ggdm_loss, lgdm_loss, nuclear_norm
from mctl.solver import AdaptationModel, MctlConfig, SolverState, fit, project

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AdaptationModel",
    "AffinityGraph",
    "ClassifierModel",
    "ConfigError",
    "ConvergenceWarning",
    "Dataset",
    "GramSet",
    "InputError",
    "KernelSpec",
    "LossBreakdown",
    "MctlConfig",
    "MctlError",
    "NumericError",
    "SolverState",
    "SyntheticSpec",
    "augmented_lagrangian",
    "build_gram_set",
    "evaluate",
    "fit",
    "generate",
    "ggdm_loss",
    "gram",
    "knn_graph",
    "lgdm_loss",
    "load_csv",
    "nuclear_norm",
    "predict",
    "project",
    "save_csv",
    "standardize",
    "train_classifier",
]
