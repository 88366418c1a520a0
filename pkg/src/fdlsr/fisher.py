"""Fisher discrimination term over a class-partitioned target matrix.

For targets ``T`` (``c x n``) with class blocks ``T_i``::

    Fisher(T) = sum_i ||T_i - M_i||^2 - sum_i ||M_i - M_(i)||^2 + ||T||^2

where ``M_i`` repeats the class-``i`` mean column ``n_i`` times and ``M_(i)``
repeats the global mean column ``n_i`` times. Its exact gradient is
``4 T + 2 M - 4 M_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MeanMatrices:
    """Column-expanded class means ``M_hat`` and global mean ``M``, both ``c x n``."""

    class_means: np.ndarray
    global_mean: np.ndarray


def _class_mean_columns(T: np.ndarray, labels: np.ndarray, n_classes: int | None):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (T.shape[1],):
        raise ValueError(f"partition has {labels.size} entries for {T.shape[1]} columns")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError(f"empty classes: {np.flatnonzero(counts == 0).tolist()}")
    sums = np.zeros((T.shape[0], n_classes))
    np.add.at(sums.T, labels, T.T)
    return sums / counts, counts


def mean_matrices(T: np.ndarray, labels: np.ndarray, n_classes: int | None = None) -> MeanMatrices:
    """Expand per-class and global column means of ``T`` to full ``c x n`` matrices.

    Args:
        T: target matrix, one column per sample.
        labels: class index of every column.
        n_classes: number of classes; every class must own at least one column.
    """
    T = np.asarray(T, dtype=float)
    means, _ = _class_mean_columns(T, labels, n_classes)
    n = T.shape[1]
    global_col = T.mean(axis=1, keepdims=True)
    return MeanMatrices(
        class_means=means[:, np.asarray(labels, dtype=np.int64)],
        global_mean=np.repeat(global_col, n, axis=1),
    )


def fisher_value(T: np.ndarray, labels: np.ndarray, n_classes: int | None = None) -> float:
    T = np.asarray(T, dtype=float)
    mm = mean_matrices(T, labels, n_classes)
    within = np.sum((T - mm.class_means) ** 2)
    between = np.sum((mm.class_means - mm.global_mean) ** 2)
    return float(within - between + np.sum(T**2))


def fisher_gradient(T: np.ndarray, labels: np.ndarray, n_classes: int | None = None) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    mm = mean_matrices(T, labels, n_classes)
    return 4.0 * T + 2.0 * mm.global_mean - 4.0 * mm.class_means
