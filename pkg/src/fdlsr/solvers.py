"""Least squares regression classifiers: LSR, DLSR and FDLSR.

All three learn a projection ``Q`` (``c x d``) from normalized samples ``X``
(``d x n``) to label space. They share the ridge kernel
``K = X^T (X X^T + beta I)^{-1}``, which turns every projection update into a
single ``c x n`` by ``n x d`` product.

FDLSR alternates three closed-form updates (targets ``T``, projection ``Q``,
non-negative relaxation ``S``) on::

    ||QX - T||^2 + alpha ||T - (H + B*S)||^2 + beta ||Q||^2 + lambda Fisher(T)
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .classify import ProjectedGallery, accuracy, nn_predict
from .fisher import fisher_value, mean_matrices

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Numerical failure inside a fit (singular system, non-finite iterate)."""


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    beta: float = 1e-2
    lam: float = 1.0
    max_iter: int = 30
    tol: float = 1e-4
    # when set, run exactly this many sweeps regardless of tol
    report_iter: int | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.report_iter is not None and self.report_iter < 1:
            raise ValueError("report_iter must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass
class RelaxedTargets:
    """Learned targets ``T``, relaxation ``S >= 0`` and drag directions ``B = 2H - 1``."""

    T: np.ndarray
    S: np.ndarray
    B: np.ndarray

    @property
    def relaxed_labels(self) -> np.ndarray:
        """``H + B*S``, recovered from ``B`` since ``H = (B + 1) / 2``."""
        return (self.B + 1.0) / 2.0 + self.B * self.S


@dataclass
class SolverTrace:
    """Per-sweep record of a fit."""

    objective: list[float] = field(default_factory=list)
    q_delta: list[float] = field(default_factory=list)
    heldout_accuracy: list[float] | None = None
    converged: bool = False
    # final iterate; None for single-shot fits
    targets: RelaxedTargets | None = None

    @property
    def iterations_run(self) -> int:
        return len(self.objective)

    def rows(self):
        """Yield ``(iter, objective, q_delta[, heldout_acc])`` tuples, 1-based."""
        for i, (obj, dq) in enumerate(zip(self.objective, self.q_delta)):
            if self.heldout_accuracy is None:
                yield (i + 1, obj, dq)
            else:
                yield (i + 1, obj, dq, self.heldout_accuracy[i])


def ridge_kernel(X: np.ndarray, beta: float) -> np.ndarray:
    """Return ``K = X^T (X X^T + beta I)^{-1}`` (``n x d``) via a Cholesky solve."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise SolverError("non-finite entries in X")
    A = X @ X.T
    A[np.diag_indices_from(A)] += beta
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        Kt = scipy.linalg.cho_solve(factor, X, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolverError(f"ridge system XX^T + {beta:g} I could not be factorized: {exc}") from exc
    residual = np.linalg.norm(A @ Kt - X)
    if not np.isfinite(residual) or residual > 1e-8 * (1.0 + np.linalg.norm(X)):
        raise SolverError(f"ridge solve residual {residual:.3e} too large (beta={beta:g})")
    return Kt.T


def build_direction_matrix(H: np.ndarray) -> np.ndarray:
    """``B = 2H - 1``: +1 on the true-class entry of each column, -1 elsewhere."""
    return 2.0 * np.asarray(H, dtype=float) - 1.0


def update_t(Q, X, H, B, S, M, M_hat, alpha: float, lam: float) -> np.ndarray:
    """Closed-form target update with the means ``M``, ``M_hat`` held fixed."""
    num = Q @ X + alpha * (H + B * S) - lam * M + 2.0 * lam * M_hat
    return num / (1.0 + alpha + 2.0 * lam)


def update_q(T: np.ndarray, K: np.ndarray) -> np.ndarray:
    return T @ K


def update_s(T, H, B) -> np.ndarray:
    return np.maximum(B * (T - H), 0.0)


def objective(Q, X, T, H, B, S, cfg: SolverConfig, labels=None) -> float:
    """Full FDLSR objective. ``labels`` defaults to the class encoded by ``H``."""
    if labels is None:
        labels = np.argmax(H, axis=0)
    fit = np.sum((Q @ X - T) ** 2)
    relax = np.sum((T - (H + B * S)) ** 2)
    ridge = np.sum(Q**2)
    fisher = fisher_value(T, labels, H.shape[0]) if cfg.lam else 0.0
    return float(fit + cfg.alpha * relax + cfg.beta * ridge + cfg.lam * fisher)


def lsr_objective(Q, X, targets, beta: float) -> float:
    """``||QX - targets||^2 + beta ||Q||^2``; the LSR and DLSR losses."""
    return float(np.sum((Q @ X - targets) ** 2) + beta * np.sum(Q**2))


def _check_inputs(X, H):
    X = np.asarray(X, dtype=float)
    H = np.asarray(H, dtype=float)
    if X.ndim != 2 or H.ndim != 2 or X.shape[1] != H.shape[1]:
        raise ValueError(f"X {X.shape} and H {H.shape} must share the sample axis")
    return X, H


def _heldout_scorer(heldout, labels):
    if heldout is None:
        return None
    Xh, yh = heldout
    Xh = np.asarray(Xh, dtype=float)

    def score(Q, X):
        gallery = ProjectedGallery(Q @ X, labels)
        return accuracy(nn_predict(gallery, Q @ Xh), yh)

    return score


def fit_lsr(X, H, beta: float, K: np.ndarray | None = None) -> np.ndarray:
    """Ridge regression onto the one-hot targets: ``Q = H K``."""
    X, H = _check_inputs(X, H)
    if K is None:
        K = ridge_kernel(X, beta)
    return update_q(H, K)


def fit_dlsr(
    X,
    H,
    beta: float,
    max_iter: int = 30,
    tol: float = 1e-4,
    K: np.ndarray | None = None,
    heldout=None,
) -> tuple[np.ndarray, SolverTrace]:
    """Label-relaxed LSR by exact block coordinate descent.

    Each sweep solves ``Q = (H + B*S) K`` and then ``S = max(B*(QX - H), 0)``;
    both halves are exact minimizers, so the loss never increases. Sweeps start
    from ``S = 0`` (the first ``Q`` is the LSR solution) and ``||Q - Q_prev||^2``
    is measured against the zero matrix on the first sweep.
    """
    X, H = _check_inputs(X, H)
    if K is None:
        K = ridge_kernel(X, beta)
    labels = np.argmax(H, axis=0)
    B = build_direction_matrix(H)
    S = np.zeros_like(H)
    Q_prev = np.zeros((H.shape[0], X.shape[0]))
    score = _heldout_scorer(heldout, labels)
    trace = SolverTrace(heldout_accuracy=[] if score else None)
    for k in range(1, max_iter + 1):
        Q = update_q(H + B * S, K)
        S = update_s(Q @ X, H, B)
        delta = float(np.sum((Q - Q_prev) ** 2))
        obj = lsr_objective(Q, X, H + B * S, beta)
        if not (np.isfinite(obj) and np.isfinite(delta)):
            raise SolverError(f"non-finite iterate at DLSR iteration {k}")
        trace.objective.append(obj)
        trace.q_delta.append(delta)
        if score:
            trace.heldout_accuracy.append(score(Q, X))
        if delta < tol:
            trace.converged = True
            break
        Q_prev = Q
    trace.targets = RelaxedTargets(T=H + B * S, S=S, B=B)
    return Q, trace


def initial_state(H, K) -> tuple[np.ndarray, RelaxedTargets]:
    """Starting point of FDLSR: ``Q = H K``, ``T = H``, ``S = 0``, ``B = 2H - 1``."""
    H = np.asarray(H, dtype=float)
    return update_q(H, K), RelaxedTargets(T=H.copy(), S=np.zeros_like(H), B=build_direction_matrix(H))


def fit_fdlsr(
    X,
    H,
    cfg: SolverConfig | None = None,
    labels=None,
    heldout=None,
    K: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverTrace]:
    """Fit FDLSR by alternating the T, Q and S updates.

    Args:
        X: normalized training samples, ``d x n``.
        H: one-hot label matrix, ``c x n``.
        cfg: solver parameters; defaults to ``SolverConfig()``.
        labels: class of every column; derived from ``H`` when omitted.
        heldout: optional ``(X_test, y_test)``; NN accuracy is traced per sweep.
        K: precomputed ``ridge_kernel(X, cfg.beta)``, shareable across fits.

    Returns:
        The projection ``Q`` and the trace (with the final ``T``, ``S``, ``B``).
        Without ``cfg.report_iter`` the loop stops once
        ``||Q - Q_prev||^2 < cfg.tol`` or after ``cfg.max_iter`` sweeps; with it,
        exactly ``report_iter`` sweeps run.
    """
    cfg = cfg or SolverConfig()
    X, H = _check_inputs(X, H)
    c = H.shape[0]
    labels = np.argmax(H, axis=0) if labels is None else np.asarray(labels, dtype=np.int64)
    if K is None:
        K = ridge_kernel(X, cfg.beta)

    Q, start = initial_state(H, K)
    T, S, B = start.T, start.S, start.B
    Q_prev = Q

    score = _heldout_scorer(heldout, labels)
    trace = SolverTrace(heldout_accuracy=[] if score else None)
    budget = cfg.report_iter or cfg.max_iter
    for k in range(1, budget + 1):
        # means lag one sweep behind: they come from the T being replaced
        means = mean_matrices(T, labels, c)
        T = update_t(Q, X, H, B, S, means.global_mean, means.class_means, cfg.alpha, cfg.lam)
        Q = update_q(T, K)
        S = update_s(T, H, B)

        delta = float(np.sum((Q - Q_prev) ** 2))
        obj = objective(Q, X, T, H, B, S, cfg, labels)
        if not (np.isfinite(obj) and np.isfinite(delta)):
            raise SolverError(f"non-finite iterate at FDLSR iteration {k}")
        trace.objective.append(obj)
        trace.q_delta.append(delta)
        if score:
            trace.heldout_accuracy.append(score(Q, X))
        if delta < cfg.tol:
            trace.converged = True
            if cfg.report_iter is None:
                break
        Q_prev = Q

    log.debug("fdlsr: %d sweeps, converged=%s", trace.iterations_run, trace.converged)
    trace.targets = RelaxedTargets(T=T, S=S, B=B)
    return Q, trace
