"""Slow, independent reference computations used by the test and acceptance suites.

Nothing here imports from the rest of the package: each oracle is a
from-scratch loop or generic solve, so agreement with the production code is
evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class FiniteDiffSpec:
    step: float = 1e-5
    scheme: str = "central"

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("finite-difference step must be > 0")
        if self.scheme != "central":
            raise ValueError("only central differences are supported")


def fd_gradient(f: Callable[[np.ndarray], float], T: np.ndarray, spec: FiniteDiffSpec = FiniteDiffSpec()) -> np.ndarray:
    """Central-difference gradient of a scalar function of a matrix, one entry at a time."""
    T = np.array(T, dtype=float)
    h = spec.step
    grad = np.empty_like(T)
    for idx in np.ndindex(T.shape):
        orig = T[idx]
        T[idx] = orig + h
        fp = f(T)
        T[idx] = orig - h
        fm = f(T)
        T[idx] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError(f"non-finite function value near entry {idx}")
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad


def brute_s_entry(t: float, h: float, b: float, grid_max: float = 2.0, grid_step: float = 1e-3) -> float:
    """Grid argmin over ``s in {0, step, ..., grid_max}`` of ``(t - h - b*s)^2``."""
    if not grid_step > 0:
        raise ValueError("grid_step must be > 0")
    n = int(round(grid_max / grid_step))
    best_s, best_val = 0.0, math.inf
    for i in range(n + 1):
        s = i * grid_step
        val = (t - h - b * s) ** 2
        if val < best_val:
            best_s, best_val = s, val
    return best_s


def brute_s_entries(t, h, b, grid_max: float = 2.0, grid_step: float = 1e-3) -> np.ndarray:
    """Vectorized :func:`brute_s_entry` over arrays of triples (same grid, same first-minimum rule)."""
    grid = np.arange(int(round(grid_max / grid_step)) + 1) * grid_step
    t, h, b = (np.asarray(v, dtype=float).ravel() for v in (t, h, b))
    out = np.empty(t.size)
    for start in range(0, t.size, 1000):
        sl = slice(start, start + 1000)
        vals = (t[sl, None] - h[sl, None] - b[sl, None] * grid[None, :]) ** 2
        out[sl] = grid[np.argmin(vals, axis=1)]
    return out


def loop_matmul(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    rows, inner = A.shape
    cols = B.shape[1]
    out = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc += A[i, k] * B[k, j]
            out[i, j] = acc
    return out


def scalar_fisher(T, labels) -> float:
    """Within scatter minus between scatter plus squared norm, by explicit loops."""
    T = np.asarray(T, dtype=float)
    rows, n = T.shape
    labels = [int(v) for v in np.asarray(labels).ravel()]
    members: dict[int, list[int]] = {}
    for j, cls in enumerate(labels):
        members.setdefault(cls, []).append(j)
    gmean = [sum(T[r, j] for j in range(n)) / n for r in range(rows)]
    total = 0.0
    for cols in members.values():
        cmean = [sum(T[r, j] for j in cols) / len(cols) for r in range(rows)]
        for j in cols:
            for r in range(rows):
                total += (T[r, j] - cmean[r]) ** 2
                total -= (cmean[r] - gmean[r]) ** 2
    for r in range(rows):
        for j in range(n):
            total += T[r, j] ** 2
    return total


def scalar_objective(Q, X, T, H, B, S, alpha: float, beta: float, lam: float) -> float:
    """FDLSR objective evaluated entry by entry; classes are read off ``H`` column by column."""
    Q, X, T, H, B, S = (np.asarray(v, dtype=float) for v in (Q, X, T, H, B, S))
    c, n = T.shape
    d = X.shape[0]
    fit = 0.0
    for i in range(c):
        for j in range(n):
            qx = 0.0
            for k in range(d):
                qx += Q[i, k] * X[k, j]
            fit += (qx - T[i, j]) ** 2
    relax = 0.0
    for i in range(c):
        for j in range(n):
            relax += (T[i, j] - (H[i, j] + B[i, j] * S[i, j])) ** 2
    ridge = 0.0
    for i in range(c):
        for k in range(d):
            ridge += Q[i, k] ** 2
    fisher = 0.0
    if lam:
        labels = []
        for j in range(n):
            labels.append(max(range(c), key=lambda i: H[i, j]))
        fisher = scalar_fisher(T, labels)
    return fit + alpha * relax + beta * ridge + lam * fisher


def column_solve_kernel(X, beta: float) -> np.ndarray:
    """``X^T (X X^T + beta I)^{-1}`` by one generic LU solve per sample column."""
    X = np.asarray(X, dtype=float)
    d, n = X.shape
    A = X @ X.T + beta * np.eye(d)
    K = np.empty((n, d))
    for j in range(n):
        K[j] = np.linalg.solve(A, X[:, j])
    return K


def exhaustive_nn(gallery, gallery_labels, probes) -> list[int]:
    """Scan every gallery column for every probe; first minimum wins."""
    G = np.asarray(gallery, dtype=float)
    P = np.asarray(probes, dtype=float)
    out = []
    for m in range(P.shape[1]):
        best_j, best_d = -1, math.inf
        for j in range(G.shape[1]):
            dist = 0.0
            for r in range(G.shape[0]):
                dist += (G[r, j] - P[r, m]) ** 2
            if dist < best_d:
                best_j, best_d = j, dist
        out.append(int(gallery_labels[best_j]))
    return out


def pairwise_margin_scan(T, labels) -> tuple[float | None, float]:
    """O(n^2) scan for (min inter-class, max intra-class) column distance."""
    T = np.asarray(T, dtype=float)
    labels = list(np.asarray(labels).ravel())
    n = T.shape[1]
    min_inter, max_intra = math.inf, 0.0
    for a in range(n):
        for b in range(a + 1, n):
            dist = math.sqrt(sum((T[r, a] - T[r, b]) ** 2 for r in range(T.shape[0])))
            if labels[a] == labels[b]:
                max_intra = max(max_intra, dist)
            else:
                min_inter = min(min_inter, dist)
    return (None if min_inter == math.inf else min_inter), max_intra
