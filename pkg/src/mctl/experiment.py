"""End-to-end runs: preprocess a task, fit the solver, classify target test data."""
from __future__ import annotations

import contextlib
import os
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from threadpoolctl import threadpool_limits

from mctl.classify import evaluate, train_classifier
from mctl.data import Dataset, SyntheticSpec, concat, generate, l2_normalize, load_csv, split, standardize
from mctl.errors import ConfigError, InputError
from mctl.losses import LossBreakdown
from mctl.solver import AdaptationModel, MctlConfig, fit, project

AUGMENTED = "augmented"
SOURCE_ONLY = "source-only"
MODES = (AUGMENTED, SOURCE_ONLY)
PREPROCESSING = ("zscore", "l2", "none")


@dataclass(frozen=True)
class TaskData:
    source: Dataset
    target_train: Dataset
    target_test: Dataset
    name: str = "task"

    def check(self) -> None:
        for part in (self.source, self.target_train, self.target_test):
            if part.n_samples == 0:
                raise InputError(f"{part.name or 'dataset'}: no samples")
        dims = {p.n_features for p in (self.source, self.target_train, self.target_test)}
        if len(dims) != 1:
            raise InputError(f"{self.name}: feature dimensionality differs between files: {sorted(dims)}")
        if self.source.labels is None:
            raise InputError(f"{self.source.name}: source labels are required")
        if self.target_test.labels is None:
            raise InputError(f"{self.target_test.name}: target test labels are required for scoring")


@dataclass
class RunOutcome:
    accuracy: float
    iterations: int
    wall_ms: float
    model: Optional[AdaptationModel] = None


def synthetic_task(spec: SyntheticSpec, n_train: Optional[int] = None) -> TaskData:
    """Source plus a target split into a train half and a test half."""
    source, target = generate(spec)
    if n_train is None:
        n_train = target.n_samples // 2
    train, test = split(target, n_train)
    return TaskData(source, train, test, spec.kind)


def csv_task(source, target_train, target_test, label_column: Optional[str]) -> TaskData:
    return TaskData(
        load_csv(source, label_column),
        load_csv(target_train, label_column),
        load_csv(target_test, label_column),
        name=os.path.splitext(os.path.basename(str(source)))[0],
    )


def preprocess(task: TaskData, method: str = "zscore") -> TaskData:
    """z-score statistics come from source plus target-train (transductive)."""
    parts = [task.source, task.target_train, task.target_test]
    if method == "zscore":
        parts = standardize(concat(parts[:2]), parts)
    elif method == "l2":
        parts = l2_normalize(parts)
    elif method != "none":
        raise ConfigError(f"unknown preprocessing {method!r}; choose from {PREPROCESSING}")
    return TaskData(*parts, name=task.name)


def _training_set(task: TaskData, mode: str):
    if mode == SOURCE_ONLY:
        return task.source.features, task.source.labels
    if task.target_train.labels is None:
        raise InputError(f"{task.target_train.name}: augmented mode needs labeled target-train data")
    return (
        np.hstack([task.source.features, task.target_train.features]),
        np.concatenate([task.source.labels, task.target_train.labels]),
    )


def run_baseline(task: TaskData, mode: str = SOURCE_ONLY, ridge: float = 1e-3) -> RunOutcome:
    """Same classifier on the preprocessed input features, no adaptation."""
    _check_mode(mode)
    t0 = time.perf_counter()
    F, y = _training_set(task, mode)
    clf = train_classifier(F, y, ridge)
    acc = evaluate(clf, task.target_test.features, task.target_test.labels)
    return RunOutcome(acc, 0, 1e3 * (time.perf_counter() - t0))


def run_mctl(
    task: TaskData,
    cfg: MctlConfig,
    mode: str = SOURCE_ONLY,
    ridge: float = 1e-3,
    sink: Optional[Callable[[int, LossBreakdown], None]] = None,
) -> RunOutcome:
    """Fit on (source, target-train), classify target-test in the subspace.

    ``source-only`` trains on the projected source alone. ``augmented`` also
    trains on the generated targets, labeled with the target-train labels.
    """
    _check_mode(mode)
    task.check()
    t0 = time.perf_counter()
    model = fit(task.source, task.target_train, cfg, sink=sink)
    F_src = project(model, which="source")
    if mode == SOURCE_ONLY:
        F, y = F_src, task.source.labels
    else:
        if task.target_train.labels is None:
            raise InputError(f"{task.target_train.name}: augmented mode needs labeled target-train data")
        F = np.hstack([F_src, F_src @ model.Z])
        y = np.concatenate([task.source.labels, task.target_train.labels])
    clf = train_classifier(F, y, ridge)
    acc = evaluate(clf, project(model, task.target_test), task.target_test.labels)
    return RunOutcome(acc, model.iterations, 1e3 * (time.perf_counter() - t0), model)


def _check_mode(mode):
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {MODES}")


def thread_count() -> Optional[int]:
    """Thread cap from ``MCTL_THREADS`` (None means the BLAS default)."""
    raw = os.environ.get("MCTL_THREADS")
    if raw in (None, ""):
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"MCTL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"MCTL_THREADS must be a positive integer, got {raw!r}")
    return n


def thread_limits(n: Optional[int]):
    return contextlib.nullcontext() if n is None else threadpool_limits(limits=n)
