"""Ridge least-squares classifier on one-hot targets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mctl.errors import InputError, NumericError


@dataclass(frozen=True)
class ClassifierModel:
    weights: np.ndarray  # d x C
    bias: np.ndarray  # C
    classes: tuple
    ridge: float

    def scores(self, features) -> np.ndarray:
        F = np.asarray(features, dtype=np.float64)
        if F.ndim != 2 or F.shape[0] != self.weights.shape[0]:
            raise InputError(
                f"expected {self.weights.shape[0]} x batch features, got {F.shape}"
            )
        return self.weights.T @ F + self.bias[:, None]


def train_classifier(features, labels: Sequence[int], ridge: float = 1e-3) -> ClassifierModel:
    """Fit ``W, b`` minimizing ``mean ||W^T f + b - onehot(y)||^2 + ridge ||W||^2``.

    Features and one-hot targets are centered, so the bias carries the class
    priors. Normal equations are sample-averaged: duplicating the training set
    leaves the model unchanged.
    """
    F = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if F.ndim != 2 or y.ndim != 1 or F.shape[1] != y.size:
        raise InputError(f"need one label per feature column: {F.shape} vs {y.shape}")
    if y.size == 0:
        raise InputError("empty training set")
    if ridge < 0:
        raise InputError("ridge must be >= 0")
    classes = np.unique(y)
    if classes.size < 2:
        raise InputError("need at least two classes")
    N = y.size
    Y = (y[None, :] == classes[:, None]).astype(np.float64)
    f_mean = F.mean(axis=1)
    y_mean = Y.mean(axis=1)
    Fc = F - f_mean[:, None]
    Yc = Y - y_mean[:, None]
    lhs = (Fc @ Fc.T) / N + ridge * np.eye(F.shape[0])
    rhs = (Fc @ Yc.T) / N
    if ridge == 0 and np.linalg.matrix_rank(lhs) < lhs.shape[0]:
        raise NumericError("least-squares system is singular with ridge = 0; use ridge > 0")
    try:
        W = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"least-squares solve failed ({exc}); use ridge > 0") from exc
    b = y_mean - W.T @ f_mean
    return ClassifierModel(W, b, tuple(classes.tolist()), float(ridge))


def predict(model: ClassifierModel, features) -> np.ndarray:
    """Arg-max class; ties go to the earlier entry of ``model.classes``."""
    idx = np.argmax(model.scores(features), axis=0)
    return np.asarray(model.classes)[idx]


def evaluate(model: ClassifierModel, features, labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InputError("empty test set")
    pred = predict(model, features)
    if pred.shape != labels.shape:
        raise InputError(f"{pred.size} predictions for {labels.size} labels")
    return float(np.mean(pred == labels))


def accuracy(predictions, labels) -> float:
    predictions, labels = np.asarray(predictions), np.asarray(labels)
    if labels.size == 0:
        raise InputError("empty test set")
    return float(np.mean(predictions == labels))
