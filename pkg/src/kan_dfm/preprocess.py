"""Feature scaling, encoding, and data partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenarios import Dataset, as_dataset


@dataclass
class Scaler:
    """Per-feature min-max normalization fitted on training data only.

    x' = (x - x_min) / (x_max - x_min); values outside the fitted range
    map outside [0, 1] and are handled by the spline clamping policy.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        self.mins = np.asarray(self.mins, dtype=float)
        self.maxs = np.asarray(self.maxs, dtype=float)
        if self.mins.shape != self.maxs.shape or self.mins.ndim != 1:
            raise ValueError("mins/maxs must be 1-D arrays of equal length")
        if np.any(self.maxs <= self.mins):
            raise ValueError("every feature must satisfy max > min")

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mins) / (self.maxs - self.mins)

    def invert(self, Xn: np.ndarray) -> np.ndarray:
        return np.asarray(Xn, dtype=float) * (self.maxs - self.mins) + self.mins


def fit_scaler(train, feature_names=None) -> Scaler:
    ds = as_dataset(train) if not isinstance(train, np.ndarray) else None
    X = train if ds is None else ds.X
    names = feature_names or (ds.feature_names if ds is not None else None)
    mins = X.min(axis=0)
    maxs = X.max(axis=0)
    constant = np.flatnonzero(maxs <= mins)
    if constant.size:
        label = (
            ", ".join(names[i] for i in constant) if names else str(list(constant))
        )
        raise ValueError(f"constant feature(s) cannot be scaled: {label}")
    return Scaler(mins, maxs)


def apply_scaler(scaler: Scaler, record_or_X) -> np.ndarray:
    if hasattr(record_or_X, "as_vector"):
        return scaler.apply(record_or_X.as_vector())
    return scaler.apply(record_or_X)


def one_hot(category_index: int, n_categories: int) -> np.ndarray:
    """Binary indicator vector with a single 1 at the category position."""
    if not 0 <= category_index < n_categories:
        raise IndexError(
            f"category index {category_index} out of range for {n_categories} categories"
        )
    z = np.zeros(n_categories)
    z[category_index] = 1.0
    return z


def _stratified_take(y: np.ndarray, frac: float, rng: np.random.Generator):
    """Per-class shuffled index split; the first part holds ~frac of each
    class with largest-remainder rounding so totals stay at round(frac*N)."""
    classes = np.unique(y)
    target_total = int(round(frac * len(y)))
    per_class = []
    for c in classes:
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        per_class.append(idx)
    raw = [frac * len(idx) for idx in per_class]
    counts = [int(np.floor(r)) for r in raw]
    remainders = np.array(raw) - np.array(counts)
    for i in np.argsort(-remainders):
        if sum(counts) >= target_total:
            break
        if counts[i] < len(per_class[i]):
            counts[i] += 1
    first = np.concatenate([idx[:c] for idx, c in zip(per_class, counts)])
    second = np.concatenate([idx[c:] for idx, c in zip(per_class, counts)])
    return np.sort(first), np.sort(second)


def split(records, train_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded stratified shuffle-split into (train, test)."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    ds = as_dataset(records)
    if ds.y is None:
        raise ValueError("split requires labeled records")
    if len(ds) < 2:
        raise ValueError("too few records to split")
    rng = np.random.default_rng(seed)
    tr_idx, te_idx = _stratified_take(ds.y, train_frac, rng)
    if len(tr_idx) == 0 or len(te_idx) == 0:
        raise ValueError("too few records to split at this fraction")
    return ds.subset(tr_idx), ds.subset(te_idx)


def kfold(records, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    """Stratified k-fold (train, valid) pairs; validation folds are
    disjoint and jointly cover the dataset."""
    if k < 2:
        raise ValueError("k must be >= 2")
    ds = as_dataset(records)
    if ds.y is None:
        raise ValueError("kfold requires labeled records")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(ds), dtype=int)
    for c in np.unique(ds.y):
        idx = np.flatnonzero(ds.y == c)
        if len(idx) < k:
            raise ValueError(f"class {c} has fewer than k={k} records")
        rng.shuffle(idx)
        fold_of[idx] = np.arange(len(idx)) % k
    folds = []
    for f in range(k):
        valid = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        folds.append((ds.subset(train), ds.subset(valid)))
    return folds
