"""Dataset loading, preprocessing and splitting.

Two text formats are supported:

* CSV: comma separated, no header, integer label in the first column,
  features in the remaining columns.
* LIBSVM: ``<label> idx:value idx:value ...`` sparse lines, densified with
  1-based indices.

Labels are remapped to contiguous 0-based indices following the sorted
order of the original label values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "Standardizer",
    "load_dataset",
    "save_csv",
    "split_stratified_indices",
    "split_stratified",
    "kfold_indices",
]


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    label_values: np.ndarray  # original labels, index = remapped class id

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y disagree on the number of samples")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("dataset contains non-finite values")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.label_values)):
            raise ValueError("labels out of range")

    @property
    def n_classes(self) -> int:
        return len(self.label_values)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)


def _remap_labels(raw):
    values = np.unique(raw)
    lookup = {v: i for i, v in enumerate(values)}
    y = np.asarray([lookup[v] for v in raw], dtype=np.int64)
    return y, values


def _load_csv(path):
    rows, labels = [], []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ValueError(f"{path}:{lineno}: expected {width} fields, got {len(parts)}")
            try:
                labels.append(int(float(parts[0])))
                rows.append([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    return np.asarray(rows, dtype=np.float64), labels


def _load_libsvm(path):
    entries, labels, max_idx = [], [], 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(int(float(parts[0])))
                row = {}
                for item in parts[1:]:
                    idx, _, val = item.partition(":")
                    idx = int(idx)
                    if idx < 1:
                        raise ValueError(f"feature index {idx} is not 1-based")
                    row[idx] = float(val)
                    max_idx = max(max_idx, idx)
                entries.append(row)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not entries:
        raise ValueError(f"{path}: empty dataset")
    X = np.zeros((len(entries), max_idx))
    for i, row in enumerate(entries):
        for idx, val in row.items():
            X[i, idx - 1] = val
    return X, labels


def load_dataset(path, fmt: str = "csv") -> Dataset:
    if fmt == "csv":
        X, labels = _load_csv(path)
    elif fmt == "libsvm":
        X, labels = _load_libsvm(path)
    else:
        raise ValueError(f"unknown dataset format {fmt!r}")
    y, values = _remap_labels(labels)
    return Dataset(X, y, values)


def save_csv(path, X, y):
    """Write label-first CSV readable by load_dataset."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    with open(path, "w") as fh:
        for label, row in zip(y, X):
            fh.write(str(int(label)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


@dataclass
class Standardizer:
    """Per-dimension zero-mean unit-variance transform fitted on training data.

    Zero-variance dimensions get scale 1 so they pass through unchanged.
    """

    mean: np.ndarray
    scale: np.ndarray

    @staticmethod
    def fit(X) -> "Standardizer":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.where(std > 0.0, std, 1.0)
        return Standardizer(mean, scale)

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (X - self.mean) / self.scale


def split_stratified_indices(y, fraction: float, seed):
    """Disjoint per-class split; returns (first, second) index arrays.

    The first part receives round(fraction * N_c) samples per class,
    clipped so both sides keep at least one sample.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    first, second = [], []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if len(idx) < 2:
            raise ValueError(f"class {c} has fewer than 2 samples")
        idx = rng.permutation(idx)
        n_first = int(np.floor(fraction * len(idx) + 0.5))
        n_first = min(max(n_first, 1), len(idx) - 1)
        first.append(idx[:n_first])
        second.append(idx[n_first:])
    return np.sort(np.concatenate(first)), np.sort(np.concatenate(second))


def split_stratified(ds: Dataset, fraction: float, seed):
    ia, ib = split_stratified_indices(ds.y, fraction, seed)
    return (
        Dataset(ds.X[ia], ds.y[ia], ds.label_values),
        Dataset(ds.X[ib], ds.y[ib], ds.label_values),
    )


def kfold_indices(y, k: int, seed):
    """Stratified k-fold; returns a list of (train_idx, test_idx) pairs.

    Test folds are disjoint and cover every index exactly once.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if len(idx) < k:
            raise ValueError(f"class {c} has fewer than k={k} samples")
        idx = rng.permutation(idx)
        for i, j in enumerate(idx):
            folds[i % k].append(j)
    out = []
    all_idx = np.arange(len(y))
    for f in folds:
        test = np.sort(np.asarray(f, dtype=np.int64))
        train = np.setdiff1d(all_idx, test)
        out.append((train, test))
    return out
