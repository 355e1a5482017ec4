"""Convex comparison methods: l1-penalized least squares and equality-constrained
l1 minimization, both solved with the same splitting scheme and stopping rule
as the main solver so iteration counts are directly comparable.

The l1-penalized solution carries a bias proportional to the regularization
weight, so by default the final estimate is projected componentwise onto the
alphabet before being reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalFailureError
from .model import Alphabet, Problem
from .solver import RecoveryResult, SolverState, exactness_distance, soft_threshold

__all__ = ["BaselineConfig", "solve_lasso_admm", "solve_bp_admm"]


@dataclass(frozen=True)
class BaselineConfig:
    """Parameters for the convex baselines; `lam` is only read by the l1-penalized solver."""

    lam: float = 1e-2
    alpha: float = 1.0
    max_iters: int = 5000
    iterate_tol: float = 1e-12
    quantize_output: bool = True

    def __post_init__(self):
        if not (self.lam > 0) or not (self.alpha > 0):
            raise ValueError("lam and alpha must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (self.iterate_tol > 0):
            raise ValueError("iterate_tol must be positive")


def _run_admm(x_step, z_step, n, config, callback):
    """Shared x/z/mu loop with the successive-iterate stopping rule."""
    x = np.zeros(n)
    z = np.zeros(n)
    mu = np.zeros(n)
    converged = False
    last_step = math.inf
    t = 0
    for t in range(1, config.max_iters + 1):
        x_prev, z_prev = x, z
        x = x_step(z, mu)
        z = z_step(x, mu)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            raise NumericalFailureError(
                f"non-finite iterate at iteration {t}",
                state=SolverState(x_prev, z_prev, mu, np.zeros(n), t - 1),
            )
        mu = mu + config.alpha * (x - z)
        if callback is not None:
            callback(SolverState(x, z, mu, np.zeros(n), t))
        last_step = max(
            float(np.linalg.norm(x - x_prev)), float(np.linalg.norm(z - z_prev))
        )
        if last_step < config.iterate_tol:
            converged = True
            break
    return x, t, converged, last_step


def _package(raw, problem, config, alphabet, objective, iterations, converged, last_step):
    if config.quantize_output:
        if alphabet is None:
            raise ValueError("quantize_output requires an alphabet")
        estimate = alphabet.quantize(raw)
    else:
        estimate = raw
    exact = (
        exactness_distance(raw, alphabet) < 1e-4 if alphabet is not None else False
    )
    return RecoveryResult(
        estimate=estimate,
        iterations=iterations,
        reshuffles=0,
        converged=converged,
        exact=exact,
        stationarity_residual=None,
        objective=objective,
        last_step_norm=last_step,
        raw_estimate=raw,
    )


def solve_lasso_admm(
    problem: Problem,
    config: BaselineConfig,
    alphabet: Alphabet | None = None,
    callback=None,
) -> RecoveryResult:
    """l1-penalized least squares via splitting.

    x-step solves (A^T A + alpha I) x = A^T y + alpha z - mu through a cached
    Cholesky factor, z-step soft-thresholds at lam/alpha, and the dual takes
    an ascent step. Stops like the main solver. `raw_estimate` keeps the
    biased minimizer when the output is quantized.
    """
    A, y = problem.A, problem.y
    gram = A.T @ A
    gram[np.diag_indices_from(gram)] += config.alpha
    chol = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    aty = A.T @ y

    def x_step(z, mu):
        return scipy.linalg.cho_solve(chol, aty + config.alpha * z - mu, check_finite=False)

    def z_step(x, mu):
        return soft_threshold(x + mu / config.alpha, config.lam / config.alpha)

    raw, iters, converged, last_step = _run_admm(x_step, z_step, problem.n, config, callback)
    r = y - A @ raw
    objective = float(0.5 * np.dot(r, r) + config.lam * np.sum(np.abs(raw)))
    return _package(raw, problem, config, alphabet, objective, iters, converged, last_step)


def solve_bp_admm(
    problem: Problem,
    config: BaselineConfig,
    alphabet: Alphabet | None = None,
    callback=None,
) -> RecoveryResult:
    """Minimum-l1 solution of Ax = y via splitting; intended for noise-free data.

    The x-step projects onto the affine constraint set,
    v -> v - A^T (A A^T)^{-1} (A v - y), so every iterate is feasible; the
    z-step soft-thresholds at 1/alpha. Requires A to have full row rank.
    """
    A, y = problem.A, problem.y
    try:
        chol = scipy.linalg.cho_factor(A @ A.T, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("A A^T is singular: the matrix must have full row rank") from exc

    def x_step(z, mu):
        v = z - mu / config.alpha
        return v - A.T @ scipy.linalg.cho_solve(chol, A @ v - y, check_finite=False)

    def z_step(x, mu):
        return soft_threshold(x + mu / config.alpha, 1.0 / config.alpha)

    raw, iters, converged, last_step = _run_admm(x_step, z_step, problem.n, config, callback)
    objective = float(np.sum(np.abs(raw)))
    return _package(raw, problem, config, alphabet, objective, iters, converged, last_step)
