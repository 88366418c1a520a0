"""Repeated random-split evaluation, grid search and margin diagnostics."""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .classify import ProjectedGallery, accuracy, nn_predict
from .dataset import (
    Dataset,
    build_label_matrix,
    normalize_columns,
    split_per_class,
    zscore_features,
    zscore_stats,
)
from .solvers import SolverConfig, fit_dlsr, fit_fdlsr, fit_lsr, ridge_kernel

METHODS = ("lsr", "dlsr", "fdlsr")
DEFAULT_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)


class TrialError(RuntimeError):
    pass


@dataclass
class TrialReport:
    """Accuracies over repeated splits. ``std`` is the population std (ddof=0)."""

    method: str
    k_per_class: int
    seed: int
    config: SolverConfig
    accuracies: list[float]
    train_time_s: float = 0.0
    test_time_s: float = 0.0
    normalization: str = "l2"

    @property
    def repeats(self) -> int:
        return len(self.accuracies)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k_per_class": self.k_per_class,
            "repeats": self.repeats,
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "std": self.std,
            "std_kind": "population",
            "train_time_s": self.train_time_s,
            "test_time_s": self.test_time_s,
            "config": self.config.to_dict(),
            "normalization": self.normalization,
            "seed": self.seed,
        }


@dataclass
class GridResult:
    cells: dict[tuple[float, float, float], TrialReport] = field(default_factory=dict)

    @property
    def best(self) -> tuple[tuple[float, float, float], TrialReport]:
        # strict > keeps the first cell in sorted order on ties
        best_key = None
        for key in sorted(self.cells):
            if best_key is None or self.cells[key].mean > self.cells[best_key].mean:
                best_key = key
        if best_key is None:
            raise ValueError("empty grid result")
        return best_key, self.cells[best_key]

    def to_dict(self) -> dict:
        key, report = self.best
        return {
            "n_cells": len(self.cells),
            "best": {"alpha": key[0], "beta": key[1], "lambda": key[2], "report": report.to_dict()},
            "cells": [
                {"alpha": a, "beta": b, "lambda": l, "mean": r.mean, "std": r.std}
                for (a, b, l), r in sorted(self.cells.items())
            ],
        }


def split_seed(seed: int, repeat: int) -> int:
    """Independent per-repeat seed; adding repeats never changes earlier ones."""
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1)[0])


def prepare(train: Dataset, test: Dataset, scheme: str = "l2") -> tuple[Dataset, Dataset]:
    """Normalize a split with one scheme; z-score statistics come from ``train`` only."""
    if scheme == "l2":
        return normalize_columns(train), normalize_columns(test)
    if scheme == "zscore":
        mean, std = zscore_stats(train)
        return zscore_features(train, mean, std), zscore_features(test, mean, std)
    if scheme == "none":
        return train, test
    raise ValueError(f"unknown normalization {scheme!r}")


def fit_method(method: str, X: np.ndarray, H: np.ndarray, cfg: SolverConfig, K=None) -> np.ndarray:
    """Train one of ``lsr``, ``dlsr``, ``fdlsr`` and return its projection."""
    if K is None:
        K = ridge_kernel(X, cfg.beta)
    if method == "lsr":
        return fit_lsr(X, H, cfg.beta, K=K)
    if method == "dlsr":
        return fit_dlsr(X, H, cfg.beta, cfg.report_iter or cfg.max_iter, cfg.tol, K=K)[0]
    if method == "fdlsr":
        return fit_fdlsr(X, H, cfg, K=K)[0]
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _one_repeat(ds, k, seed, r, method, cfg, scheme):
    train, test = split_per_class(ds, k, split_seed(seed, r))
    if test.n_samples == 0:
        raise TrialError(f"repeat {r}: no test samples left with k={k}")
    train, test = prepare(train, test, scheme)
    X = train.features
    H = build_label_matrix(train)
    t0 = time.perf_counter()
    try:
        Q = fit_method(method, X, H, cfg)
    except Exception as exc:
        raise TrialError(f"repeat {r}: {exc}") from exc
    t1 = time.perf_counter()
    pred = nn_predict(ProjectedGallery(Q @ X, train.labels), Q @ test.features)
    acc = accuracy(pred, test.labels)
    t2 = time.perf_counter()
    return acc, t1 - t0, t2 - t1


def run_trials(
    ds: Dataset,
    k_per_class: int,
    repeats: int = 10,
    seed: int = 0,
    method: str = "fdlsr",
    cfg: SolverConfig | None = None,
    normalization: str = "l2",
    jobs: int = 1,
) -> TrialReport:
    """Train on ``k_per_class`` random samples per class, test NN accuracy on the rest, ``repeats`` times."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cfg = cfg or SolverConfig()
    args = [(ds, k_per_class, seed, r, method, cfg, normalization) for r in range(repeats)]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda a: _one_repeat(*a), args))
    else:
        results = [_one_repeat(*a) for a in args]
    return TrialReport(
        method=method,
        k_per_class=k_per_class,
        seed=seed,
        config=cfg,
        accuracies=[r[0] for r in results],
        train_time_s=float(sum(r[1] for r in results)),
        test_time_s=float(sum(r[2] for r in results)),
        normalization=normalization,
    )


def grid_search(
    ds: Dataset,
    k_per_class: int,
    repeats: int = 10,
    seed: int = 0,
    grid: Sequence[float] = DEFAULT_GRID,
    method: str = "fdlsr",
    base: SolverConfig | None = None,
    normalization: str = "l2",
    jobs: int = 1,
) -> GridResult:
    """Evaluate every ``(alpha, beta, lambda)`` in ``grid^3`` with :func:`run_trials`."""
    values = sorted(set(float(v) for v in grid))
    if not values:
        raise ValueError("empty grid")
    base = base or SolverConfig()
    keys = list(itertools.product(values, repeat=3))

    def cell(key):
        cfg = replace(base, alpha=key[0], beta=key[1], lam=key[2])
        return run_trials(ds, k_per_class, repeats, seed, method, cfg, normalization)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            reports = list(pool.map(cell, keys))
    else:
        reports = [cell(key) for key in keys]
    return GridResult(dict(zip(keys, reports)))


def margin_stats(T: np.ndarray, labels) -> tuple[float | None, float]:
    """Smallest inter-class and largest intra-class distance between columns of ``T``.

    ``min_inter`` is ``None`` when fewer than two classes are present.
    """
    T = np.asarray(T, dtype=float)
    labels = np.asarray(labels).ravel()
    dist = squareform(pdist(T.T))
    same = labels[:, None] == labels[None, :]
    off_diag = ~np.eye(labels.size, dtype=bool)
    intra = dist[same & off_diag]
    inter = dist[~same]
    max_intra = float(intra.max()) if intra.size else 0.0
    min_inter = float(inter.min()) if inter.size else None
    return min_inter, max_intra
