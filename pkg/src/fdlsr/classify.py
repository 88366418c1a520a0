"""Nearest-neighbour classification in the projected label space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

# probes per distance block; bounds the m x n distance buffer
_BLOCK = 512


@dataclass(frozen=True)
class ProjectedGallery:
    """Projected training samples ``Q X`` (one per column) and their classes."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if features.ndim != 2 or features.shape[1] != labels.size:
            raise ValueError(
                f"gallery has {features.shape[-1]} columns but {labels.size} labels"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)


def project(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Q.shape[1] != X.shape[0]:
        raise ValueError(f"cannot project {X.shape[0]}-dim samples with Q of shape {Q.shape}")
    return Q @ X


def nn_predict(gallery: ProjectedGallery, probes: np.ndarray) -> np.ndarray:
    """Label of the Euclidean-nearest gallery column for every probe column.

    Ties go to the lowest gallery column index.
    """
    G = gallery.features
    if G.shape[1] == 0:
        raise ValueError("empty gallery")
    P = np.asarray(probes, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] != G.shape[0]:
        raise ValueError(f"probes have {P.shape[0]} rows, gallery has {G.shape[0]}")
    out = np.empty(P.shape[1], dtype=np.int64)
    for start in range(0, P.shape[1], _BLOCK):
        block = P[:, start : start + _BLOCK]
        # direct differences keep exact ties exact (no ||a||^2 - 2ab + ||b||^2 cancellation)
        dist = cdist(block.T, G.T, "sqeuclidean")
        out[start : start + block.shape[1]] = gallery.labels[np.argmin(dist, axis=1)]
    return out


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {truth.size} labels")
    if pred.size == 0:
        raise ValueError("no predictions to score")
    return float(np.mean(pred == truth))
