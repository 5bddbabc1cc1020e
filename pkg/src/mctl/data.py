"""Datasets, CSV ingestion, seeded synthetic domain shifts and preprocessing.

Feature matrices follow the column-per-sample convention throughout:
``features`` has shape ``(m, n)`` for ``n`` samples of dimension ``m``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from mctl.errors import ConfigError, InputError

SYNTHETIC_KINDS = ("rotated-gaussians", "two-moons-shift", "locality-shift")
_DEFAULT_ROTATION = {
    "rotated-gaussians": 30.0,
    "two-moons-shift": 30.0,
    "locality-shift": 90.0,
}


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2:
            raise InputError(f"{self.name or 'dataset'}: features must be 2-D (m x n), got {X.shape}")
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise InputError(
                f"{self.name or 'dataset'}: non-finite value at feature {bad[0]}, sample {bad[1]}"
            )
        object.__setattr__(self, "features", X)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.ndim != 1 or y.shape[0] != X.shape[1]:
                raise InputError(
                    f"{self.name or 'dataset'}: {y.shape} labels for {X.shape[1]} samples"
                )
            if not np.issubdtype(y.dtype, np.integer):
                raise InputError(f"{self.name or 'dataset'}: labels must be integers")
            object.__setattr__(self, "labels", y.astype(np.int64))

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    def subset(self, idx, name: Optional[str] = None) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            self.features[:, idx],
            None if self.labels is None else self.labels[idx],
            self.name if name is None else name,
        )


def concat(datasets: Sequence[Dataset], name: str = "") -> Dataset:
    """Join datasets sample-wise; labels survive only if every part has them."""
    X = np.hstack([d.features for d in datasets])
    if all(d.labels is not None for d in datasets):
        y = np.concatenate([d.labels for d in datasets])
    else:
        y = None
    return Dataset(X, y, name)


# --------------------------------------------------------------------------- CSV


def load_csv(path, label_column: Optional[str] = None, name: Optional[str] = None) -> Dataset:
    """Read a header-first, comma-separated numeric table (one sample per row).

    Every column except ``label_column`` becomes a feature dimension.
    Errors report the 1-based file line and the column header.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if label_column is not None and label_column not in header:
        raise InputError(f"{path}: label column {label_column!r} not in header {header}")
    label_pos = header.index(label_column) if label_column is not None else None
    feat_pos = [j for j in range(len(header)) if j != label_pos]

    body = [r for r in rows[1:] if r]  # tolerate a trailing blank line
    if not body:
        raise InputError(f"{path}: no data rows")
    X = np.empty((len(feat_pos), len(body)))
    y = np.empty(len(body), dtype=np.int64) if label_pos is not None else None
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise InputError(f"{path}:{line}: expected {len(header)} cells, found {len(row)}")
        for f, j in enumerate(feat_pos):
            X[f, i] = _parse_float(row[j], path, line, header[j])
        if label_pos is not None:
            y[i] = _parse_label(row[label_pos], path, line, header[label_pos])
    return Dataset(X, y, name if name is not None else path.stem)


def _parse_float(cell, path, line, col):
    try:
        v = float(cell)
    except ValueError:
        raise InputError(f"{path}:{line}: column {col!r}: non-numeric cell {cell!r}") from None
    if not math.isfinite(v):
        raise InputError(f"{path}:{line}: column {col!r}: non-finite cell {cell!r}")
    return v


def _parse_label(cell, path, line, col):
    try:
        return int(cell)
    except ValueError:
        pass
    v = _parse_float(cell, path, line, col)
    if v != int(v):
        raise InputError(f"{path}:{line}: column {col!r}: label {cell!r} is not an integer")
    return int(v)


def save_csv(ds: Dataset, path, label_column: str = "y") -> None:
    """Write ``ds`` in the format :func:`load_csv` reads (lossless float repr)."""
    header = [f"f{i}" for i in range(ds.n_features)]
    if ds.labels is not None:
        header.append(label_column)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(ds.n_samples):
            row = [repr(float(v)) for v in ds.features[:, i]]
            if ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            w.writerow(row)


# --------------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class SyntheticSpec:
    """Desk-scale domain-shift task.

    ``n_per_class`` source samples are drawn per class; the target domain gets
    ``n_target`` samples (default: same total as the source), labels assigned
    round-robin so any prefix is class-balanced. ``paired`` makes the target
    reuse the source noise stream, so a zero shift reproduces the source
    samples exactly.
    """

    kind: str = "rotated-gaussians"
    n_per_class: int = 20
    classes: int = 3
    rotation_deg: Optional[float] = None
    noise_sigma: float = 0.3
    seed: int = 0
    n_target: Optional[int] = None
    paired: bool = False

    def resolved(self) -> "SyntheticSpec":
        rot = _DEFAULT_ROTATION.get(self.kind, 0.0) if self.rotation_deg is None else self.rotation_deg
        n_t = self.n_per_class * self.classes if self.n_target is None else self.n_target
        return replace(self, rotation_deg=float(rot), n_target=int(n_t))

    def validate(self) -> None:
        if self.kind not in SYNTHETIC_KINDS:
            raise ConfigError(f"unknown synthetic kind {self.kind!r}; choose from {SYNTHETIC_KINDS}")
        if self.n_per_class < 1:
            raise ConfigError("n_per_class must be >= 1")
        if self.classes < 2:
            raise ConfigError("need at least 2 classes")
        if self.kind == "two-moons-shift" and self.classes != 2:
            raise ConfigError("two-moons-shift has exactly 2 classes")
        if not self.noise_sigma >= 0 or not math.isfinite(self.noise_sigma):
            raise ConfigError("noise_sigma must be a finite value >= 0")
        if self.n_target is not None and self.n_target < 1:
            raise ConfigError("n_target must be >= 1")
        if self.rotation_deg is not None and not math.isfinite(self.rotation_deg):
            raise ConfigError("rotation_deg must be finite")


def _rotation(deg):
    t = np.deg2rad(deg)
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


def generate(spec: SyntheticSpec) -> tuple[Dataset, Dataset]:
    """Draw ``(source, target)`` for a synthetic shift; pure function of ``spec``."""
    spec.validate()
    spec = spec.resolved()
    C = spec.classes
    n_s = spec.n_per_class * C
    n_t = spec.n_target
    src_seq, tgt_seq = np.random.SeedSequence(spec.seed).spawn(2)
    rng_s = np.random.default_rng(src_seq)
    rng_t = np.random.default_rng(src_seq if spec.paired else tgt_seq)
    y_s = np.arange(n_s) % C
    y_t = np.arange(n_t) % C
    make = {
        "rotated-gaussians": _rotated_gaussians,
        "two-moons-shift": _two_moons,
        "locality-shift": _locality_shift,
    }[spec.kind]
    Xs = make(spec, y_s, rng_s, shifted=False)
    Xt = make(spec, y_t, rng_t, shifted=True)
    tag = f"{spec.kind}-s{spec.seed}"
    return Dataset(Xs, y_s, f"{tag}-source"), Dataset(Xt, y_t, f"{tag}-target")


def _rotated_gaussians(spec, y, rng, shifted):
    ang = 2 * np.pi * np.arange(spec.classes) / spec.classes
    means = np.stack([np.cos(ang), np.sin(ang)])
    X = means[:, y] + spec.noise_sigma * rng.standard_normal((2, y.size))
    return _rotation(spec.rotation_deg) @ X if shifted else X


def _two_moons(spec, y, rng, shifted):
    t = np.pi * rng.random(y.size)
    upper = np.stack([np.cos(t), np.sin(t)])
    lower = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    X = np.where(y == 0, upper, lower) + spec.noise_sigma * rng.standard_normal((2, y.size))
    if shifted and spec.rotation_deg % 360 != 0:
        c = np.array([[0.5], [0.25]])
        X = _rotation(spec.rotation_deg) @ (X - c) + c
    return X


def _locality_shift(spec, y, rng, shifted, radius=1.0, spread=0.8):
    # Each class is two sub-clusters placed symmetrically about the class
    # centre; the target turns that axis, so class and global means are kept.
    ang = 2 * np.pi * np.arange(spec.classes) / spec.classes
    centres = radius * np.stack([np.cos(ang), np.sin(ang)])
    axis = np.stack([-np.sin(ang), np.cos(ang)])
    if shifted:
        axis = _rotation(spec.rotation_deg) @ axis
    side = np.where((np.arange(y.size) // spec.classes) % 2 == 0, 1.0, -1.0)
    X = centres[:, y] + spread * side * axis[:, y]
    return X + spec.noise_sigma * rng.standard_normal((2, y.size))


# ------------------------------------------------------------------ preprocessing


def standardize(fit_on: Dataset, apply_to: Sequence[Dataset]) -> list[Dataset]:
    """Per-dimension z-score with ``fit_on`` statistics; constant dims become 0."""
    mean = fit_on.features.mean(axis=1, keepdims=True)
    std = fit_on.features.std(axis=1, keepdims=True)
    live = std[:, 0] > 0
    out = []
    for d in apply_to:
        if d.n_features != fit_on.n_features:
            raise InputError(f"{d.name}: {d.n_features} features, expected {fit_on.n_features}")
        Z = np.zeros_like(d.features)
        Z[live] = (d.features[live] - mean[live]) / std[live]
        out.append(Dataset(Z, d.labels, d.name))
    return out


def l2_normalize(datasets: Sequence[Dataset]) -> list[Dataset]:
    """Scale every sample to unit Euclidean norm (all-zero samples untouched)."""
    out = []
    for d in datasets:
        norms = np.linalg.norm(d.features, axis=0)
        norms[norms == 0] = 1.0
        out.append(Dataset(d.features / norms, d.labels, d.name))
    return out


def split(ds: Dataset, n_first: int, seed: Optional[int] = None) -> tuple[Dataset, Dataset]:
    """Deterministic two-way split: the first ``n_first`` samples vs the rest.

    With ``seed`` the samples are permuted first (seeded, reproducible).
    """
    if not 0 < n_first < ds.n_samples:
        raise InputError(f"cannot split {ds.n_samples} samples at {n_first}")
    order = np.arange(ds.n_samples)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(ds.n_samples)
    return (
        ds.subset(order[:n_first], f"{ds.name}-train"),
        ds.subset(order[n_first:], f"{ds.name}-test"),
    )
