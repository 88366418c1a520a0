"""Loading, normalizing, splitting and encoding labeled feature datasets.

Samples are stored as *columns* of a ``d x n`` feature matrix. On disk the
layout is one sample per row (label first), which is transposed at load.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

NORMALIZATION_SCHEMES = ("l2", "zscore", "none")


class DatasetError(ValueError):
    """Raised for malformed dataset files or infeasible dataset requests."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with one sample per column and a dense class index per sample.

    Attributes:
        features: ``(d, n)`` float array.
        labels: ``(n,)`` integer array of class indices in ``[0, c)``.
        class_names: label name for each class index; defaults to ``"0".."c-1"``.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        features = np.array(self.features, dtype=float, ndmin=2)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if features.shape[1] != labels.shape[0]:
            raise DatasetError(
                f"{features.shape[1]} feature columns but {labels.shape[0]} labels"
            )
        if labels.size and labels.min() < 0:
            raise DatasetError("class indices must be non-negative")
        names = tuple(self.class_names)
        n_classes = int(labels.max()) + 1 if labels.size else 0
        if not names:
            names = tuple(str(i) for i in range(n_classes))
        if len(names) < n_classes:
            raise DatasetError("fewer class names than class indices")
        counts = np.bincount(labels, minlength=len(names))
        if np.any(counts == 0):
            missing = np.flatnonzero(counts == 0).tolist()
            raise DatasetError(f"classes without samples: {missing}")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, columns: Sequence[int] | np.ndarray) -> "Dataset":
        """Return the dataset restricted to ``columns``, keeping the class vocabulary."""
        columns = np.asarray(columns, dtype=np.int64)
        return _with_vocabulary(self.features[:, columns], self.labels[columns], self.class_names)

    def with_features(self, features: np.ndarray) -> "Dataset":
        return _with_vocabulary(features, self.labels, self.class_names)


def _with_vocabulary(features, labels, class_names) -> Dataset:
    # subsets may drop whole classes; skip the per-class count check for them
    ds = object.__new__(Dataset)
    features = np.array(features, dtype=float, ndmin=2)
    labels = np.array(labels, dtype=np.int64).ravel()
    features.setflags(write=False)
    labels.setflags(write=False)
    object.__setattr__(ds, "features", features)
    object.__setattr__(ds, "labels", labels)
    object.__setattr__(ds, "class_names", tuple(class_names))
    return ds


def load_csv(path: str | Path, skip_header: bool = False) -> Dataset:
    """Read a label-first CSV file (one sample per row, no header by default).

    Label strings are mapped to dense indices in first-appearance order; the
    mapping is kept in ``Dataset.class_names``.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    rows: list[list[float]] = []
    names: list[str] = []
    index: dict[str, int] = {}
    labels: list[int] = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if skip_header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise DatasetError(f"{path}: row {lineno} has no feature columns")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DatasetError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}"
                )
            label = row[0].strip()
            if not label:
                raise DatasetError(f"{path}: row {lineno} has an empty label")
            try:
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                bad = next(c for c in row[1:] if not _is_float(c))
                raise DatasetError(
                    f"{path}: row {lineno} has non-numeric feature value {bad!r}"
                ) from None
            if label not in index:
                index[label] = len(names)
                names.append(label)
            labels.append(index[label])
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: empty file")
    return Dataset(np.array(rows, dtype=float).T, np.array(labels), tuple(names))


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write ``ds`` in the layout read by :func:`load_csv` (``repr`` floats, exact round-trip)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for j in range(ds.n_samples):
            writer.writerow(
                [ds.class_names[ds.labels[j]]] + [repr(float(v)) for v in ds.features[:, j]]
            )


def normalize_columns(ds: Dataset) -> Dataset:
    """Scale every sample to unit Euclidean norm; all-zero samples stay zero."""
    X = ds.features
    norms = np.linalg.norm(X, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return ds.with_features(X / safe)


def zscore_stats(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean and std (std of constant features replaced by 1)."""
    mean = ds.features.mean(axis=1)
    std = ds.features.std(axis=1)
    return mean, np.where(std > 0, std, 1.0)


def zscore_features(ds: Dataset, mean: np.ndarray, std: np.ndarray) -> Dataset:
    return ds.with_features((ds.features - mean[:, None]) / std[:, None])


def build_label_matrix(ds: Dataset) -> np.ndarray:
    """One-hot ``c x n`` matrix ``H`` with ``H[j, i] = 1`` iff sample ``i`` is in class ``j``."""
    return one_hot(ds.labels, ds.n_classes)


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    H = np.zeros((n_classes, labels.size))
    H[labels, np.arange(labels.size)] = 1.0
    return H


def split_per_class(ds: Dataset, k: int, seed: int) -> tuple[Dataset, Dataset]:
    """Randomly draw ``k`` training samples from every class; the rest go to test.

    Column order inside each part follows the original column order.
    """
    counts = ds.class_counts
    if k < 1:
        raise DatasetError("k must be at least 1")
    if k > counts.min():
        raise DatasetError(
            f"k={k} exceeds the smallest class size {int(counts.min())}"
        )
    rng = np.random.default_rng(seed)
    train_mask = np.zeros(ds.n_samples, dtype=bool)
    for cls in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == cls)
        train_mask[rng.choice(members, size=k, replace=False)] = True
    return ds.subset(np.flatnonzero(train_mask)), ds.subset(np.flatnonzero(~train_mask))


def random_projection(
    ds: Dataset, target_dim: int, seed: int, matrix: np.ndarray | None = None
) -> Dataset:
    """Replace features ``X`` by ``R @ X`` with ``R`` a seeded ``target_dim x d`` Gaussian matrix.

    ``matrix`` overrides ``R`` (used by tests).
    """
    if target_dim < 1:
        raise DatasetError("target_dim must be >= 1")
    if matrix is None:
        matrix = random_projection_matrix(target_dim, ds.n_features, seed)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (target_dim, ds.n_features):
        raise DatasetError(
            f"projection matrix has shape {matrix.shape}, expected {(target_dim, ds.n_features)}"
        )
    return ds.with_features(matrix @ ds.features)


def random_projection_matrix(target_dim: int, d: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((target_dim, d))


def synth_blobs(c: int, per_class: int, d: int, spread: float, seed: int) -> Dataset:
    """Gaussian clusters with unit-variance centers and isotropic noise of scale ``spread``.

    Overlap grows with ``spread``; at ``spread -> 0`` every sample sits on its
    class center.
    """
    if min(c, per_class, d) < 1:
        raise DatasetError("c, per_class and d must all be >= 1")
    if not spread > 0:
        raise DatasetError("spread must be > 0")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((d, c))
    labels = np.repeat(np.arange(c), per_class)
    noise = rng.standard_normal((d, c * per_class))
    return Dataset(centers[:, labels] + spread * noise, labels)
