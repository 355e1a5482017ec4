"""ADMM-type solvers for the box-constrained concave recovery objectives.

The iteration alternates a ridge-like linear solve for x (projected onto the
hull box), a weighted soft-threshold-plus-projection for the splitting
variable z, and a dual ascent step. For the ternary alphabet the threshold
weight is the constant d. For a generic alphabet each component's weight is
the quantized magnitude of the current x iterate, floored at d; once the
iterate commits to a lattice pattern (relative square distance below
`exact_tol`), the weights freeze at that pattern and the remaining iterations
solve the resulting fixed-weight problem to tolerance. With q = 1 the weights
are identically d, so the generic cycle coincides with the ternary one.

The linear system matrix A^T A + (alpha - lam) I is independent of the
iterates, so its Cholesky factorization is computed once per solve and reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .exceptions import NumericalFailureError
from .model import Alphabet, Problem
from .penalty import ObjectiveParams, beta_weights, objective_F, objective_H

__all__ = [
    "SolverConfig",
    "SolverState",
    "RecoveryResult",
    "FactorCache",
    "ConvergenceCheck",
    "soft_threshold",
    "project_box",
    "x_update",
    "z_update",
    "beta_update",
    "threshold_weights",
    "dual_update",
    "solve_madmm",
    "solve_madmm_r",
    "exactness_distance",
    "stationarity_residual",
    "augmented_lagrangian",
    "convergence_conditions",
]

# Components below this magnitude count as zero in stationarity checks.
ZERO_TOL = 1e-9
# Guards the denominator of the relative exactness distance when the
# quantized estimate is the zero vector.
EXACTNESS_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters; `alpha > lam` keeps the x-subproblem strongly convex."""

    lam: float
    alpha: float = 1.0
    max_iters: int = 5000
    iterate_tol: float = 1e-12
    exact_tol: float = 1e-4
    max_reshuffles: int = 50
    seed: int = 0

    def __post_init__(self):
        if not (self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not (self.alpha > self.lam):
            raise ValueError(
                f"alpha must exceed lam for a positive definite x-subproblem "
                f"(alpha={self.alpha}, lam={self.lam})"
            )
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (self.iterate_tol > 0) or not (self.exact_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_reshuffles < 0:
            raise ValueError("max_reshuffles must be non-negative")


@dataclass
class SolverState:
    """Iterates of one solve: primal x and z, dual mu, per-component weights beta."""

    x: np.ndarray
    z: np.ndarray
    mu: np.ndarray
    beta: np.ndarray
    t: int = 0

    def copy(self) -> "SolverState":
        return SolverState(self.x.copy(), self.z.copy(), self.mu.copy(), self.beta.copy(), self.t)


@dataclass(frozen=True)
class RecoveryResult:
    """Final estimate with convergence and exactness metadata."""

    estimate: np.ndarray
    iterations: int
    reshuffles: int
    converged: bool
    exact: bool
    stationarity_residual: float | None
    objective: float
    last_step_norm: float
    raw_estimate: np.ndarray | None = None


class FactorCache:
    """Cholesky factor of A^T A + (alpha - lam) I plus A^T y, shared across iterations."""

    def __init__(self, problem: Problem, lam: float, alpha: float):
        if not (alpha > lam):
            raise ValueError("alpha must exceed lam for a positive definite system")
        gram = problem.A.T @ problem.A
        gram[np.diag_indices_from(gram)] += alpha - lam
        # finiteness is checked on the iterates instead, so skip scipy's scans
        self._chol = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        self.aty = problem.A.T @ problem.y

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._chol, rhs, check_finite=False)


def soft_threshold(v, thresholds) -> np.ndarray:
    """Componentwise shrink toward zero: 0 if |v| <= a, else v - a*sign(v)."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(thresholds, dtype=float)
    if a.shape not in ((), v.shape):
        raise ValueError(f"threshold shape {a.shape} does not match vector shape {v.shape}")
    if np.any(a < 0):
        raise ValueError("thresholds must be non-negative")
    return np.sign(v) * np.maximum(np.abs(v) - a, 0.0)


def project_box(v, lower, upper) -> np.ndarray:
    """Componentwise clamp of v into [lower, upper]."""
    v = np.asarray(v, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise ValueError("box lower bound exceeds upper bound")
    return np.minimum(np.maximum(v, lower), upper)


def x_update(
    state: SolverState,
    problem: Problem,
    config: SolverConfig,
    cache: FactorCache,
    bound,
) -> np.ndarray:
    """Minimize the augmented Lagrangian in x, then project onto [-bound, bound]."""
    rhs = cache.aty + config.alpha * state.z - state.mu
    return project_box(cache.solve(rhs), -np.asarray(bound, float), bound)


def z_update(state: SolverState, config: SolverConfig, bound) -> np.ndarray:
    """Soft-threshold x + mu/alpha at lam*beta/alpha, then project onto [-bound, bound].

    `state.beta` holds the per-component threshold weights (the constant d in
    the ternary case).
    """
    w = state.x + state.mu / config.alpha
    return project_box(
        soft_threshold(w, (config.lam / config.alpha) * state.beta),
        -np.asarray(bound, float),
        bound,
    )


def beta_update(z: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    """Quantized magnitude weights of z; zero components get weight zero."""
    return beta_weights(z, alphabet)


def threshold_weights(x: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    """Solver weights: quantized magnitude of x floored at one spacing.

    The floor keeps zero components penalized at the base rate d (the slope of
    the penalty next to zero); with q = 1 the result is identically d.
    """
    return np.maximum(alphabet.d, beta_weights(x, alphabet))


def dual_update(state: SolverState, config: SolverConfig) -> np.ndarray:
    """Dual ascent: mu + alpha*(x - z)."""
    return state.mu + config.alpha * (state.x - state.z)


def exactness_distance(x, alphabet: Alphabet, floor: float = EXACTNESS_FLOOR) -> float:
    """Relative square distance from x to the alphabet lattice.

    ||x - Q(x)||^2 / max(||Q(x)||^2, floor) where Q is nearest-symbol
    quantization with ties toward the smaller magnitude.
    """
    x = np.asarray(x, dtype=float)
    qx = alphabet.quantize(x)
    diff = x - qx
    return float(diff @ diff) / max(float(qx @ qx), floor)


def stationarity_residual(
    x,
    problem: Problem,
    config: SolverConfig,
    alphabet: Alphabet | None = None,
    zero_tol: float = ZERO_TOL,
) -> float:
    """Violation of the first-order conditions A^T(Ax - y) = lam*x - mu.

    Back out mu = lam*x - A^T(Ax - y) and measure how far it is from the
    required multiplier: lam*w_i*sign(x_i) on nonzero components and
    |mu_i| <= lam*d on zero ones, where w_i is the quantized weight of x_i
    (constant d in the ternary case). With no alphabet given, unit spacing is
    assumed. Zero means x is a stationary point.
    """
    x = np.asarray(x, dtype=float)
    lam = config.lam
    mu = lam * x - problem.A.T @ (problem.A @ x - problem.y)
    if alphabet is None:
        d = 1.0
        weights = np.full(x.shape, d)
    else:
        d = alphabet.d
        weights = beta_weights(x, alphabet)
    nonzero = np.abs(x) > zero_tol
    worst = 0.0
    if np.any(nonzero):
        target = lam * weights[nonzero] * np.sign(x[nonzero])
        worst = float(np.max(np.abs(mu[nonzero] - target)))
    if np.any(~nonzero):
        slack = float(np.max(np.abs(mu[~nonzero]) - lam * d))
        worst = max(worst, slack, 0.0)
    return worst


def augmented_lagrangian(
    x, z, mu, problem: Problem, config: SolverConfig, beta
) -> float:
    """Augmented Lagrangian value at (x, z, mu) for the current weights."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    mu = np.asarray(mu, dtype=float)
    beta = np.asarray(beta, dtype=float)
    r = problem.y - problem.A @ x
    gap = x - z
    return float(
        0.5 * np.dot(r, r)
        - 0.5 * config.lam * np.dot(x, x)
        + config.lam * np.dot(beta, np.abs(z))
        + np.dot(mu, gap)
        + 0.5 * config.alpha * np.dot(gap, gap)
    )


@dataclass(frozen=True)
class ConvergenceCheck:
    """Sufficient-condition report for convergence of the splitting scheme."""

    alpha: float
    lipschitz: float
    strong_convexity: float

    @property
    def penalty_large_enough(self) -> bool:
        return self.strong_convexity > 0 and (
            self.alpha * self.strong_convexity > 2.0 * self.lipschitz**2
        )

    @property
    def penalty_dominates(self) -> bool:
        return self.alpha >= self.lipschitz

    @property
    def satisfied(self) -> bool:
        return self.penalty_large_enough and self.penalty_dominates


def convergence_conditions(problem: Problem, config: SolverConfig) -> ConvergenceCheck:
    """Evaluate the sufficient convergence conditions for the given problem.

    `lipschitz` is ||A^T A - lam I||_2; `strong_convexity` is the smallest
    eigenvalue of the x-subproblem Hessian A^T A + (alpha - lam) I. The
    conditions (alpha * gamma > 2 C^2 and alpha >= C) are sufficient, not
    necessary: the scheme is routinely run with alpha = 1 where they fail.
    """
    evals = np.linalg.eigvalsh(problem.A.T @ problem.A)
    lipschitz = float(np.max(np.abs(evals - config.lam)))
    gamma = float(evals.min() + config.alpha - config.lam)
    return ConvergenceCheck(alpha=config.alpha, lipschitz=lipschitz, strong_convexity=gamma)


def _check_finite(state: SolverState, prev_x, prev_z, prev_mu) -> None:
    if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.z)) and np.all(np.isfinite(state.mu))):
        last = SolverState(prev_x, prev_z, prev_mu, state.beta.copy(), state.t - 1)
        raise NumericalFailureError(f"non-finite iterate at iteration {state.t}", state=last)


def _madmm_loop(
    problem: Problem,
    alphabet: Alphabet,
    config: SolverConfig,
    z0: np.ndarray,
    callback=None,
):
    """Run the x/z/beta/mu cycle from a given z start; mu starts at zero.

    Weights are refreshed from the x iterate each cycle until the iterate is
    within `exact_tol` relative square distance of the lattice; from then on
    they stay frozen at that lattice pattern. For q = 1 the weights equal d
    throughout, so freezing never changes anything.
    """
    n = problem.n
    cache = FactorCache(problem, config.lam, config.alpha)
    hull = np.full(n, alphabet.hull_bound)
    state = SolverState(
        x=np.zeros(n),
        z=np.asarray(z0, dtype=float).copy(),
        mu=np.zeros(n),
        beta=np.full(n, alphabet.d if alphabet.ternary else alphabet.hull_bound),
        t=0,
    )
    ternary = alphabet.ternary  # weights are the constant d in this case
    frozen = None
    converged = False
    last_step = math.inf
    for t in range(1, config.max_iters + 1):
        # updates replace the arrays, so plain references capture the old iterate
        prev_x, prev_z, prev_mu = state.x, state.z, state.mu
        state.t = t
        state.x = x_update(state, problem, config, cache, hull)
        if not ternary:
            state.beta = frozen if frozen is not None else threshold_weights(state.x, alphabet)
        state.z = z_update(state, config, hull)
        _check_finite(state, prev_x, prev_z, prev_mu)
        state.mu = dual_update(state, config)
        if frozen is None and not ternary:
            if exactness_distance(state.x, alphabet) < config.exact_tol:
                frozen = np.maximum(alphabet.d, np.abs(alphabet.quantize(state.x)))
        if callback is not None:
            callback(state)
        last_step = max(
            float(np.linalg.norm(state.x - prev_x)),
            float(np.linalg.norm(state.z - prev_z)),
        )
        if last_step < config.iterate_tol:
            converged = True
            break
    return state, converged, last_step, state.t


def _finish(
    state: SolverState,
    problem: Problem,
    alphabet: Alphabet,
    config: SolverConfig,
    iterations: int,
    reshuffles: int,
    converged: bool,
    last_step: float,
) -> RecoveryResult:
    x = state.x
    params = ObjectiveParams(config.lam, alphabet)
    objective = objective_F(x, problem, params) if alphabet.ternary else objective_H(x, problem, params)
    return RecoveryResult(
        estimate=x,
        iterations=iterations,
        reshuffles=reshuffles,
        converged=converged,
        exact=exactness_distance(x, alphabet) < config.exact_tol,
        stationarity_residual=stationarity_residual(x, problem, config, alphabet),
        objective=objective,
        last_step_norm=last_step,
    )


def solve_madmm(
    problem: Problem,
    alphabet: Alphabet,
    config: SolverConfig,
    callback=None,
) -> RecoveryResult:
    """Run the splitting solver to a fixed point of the recovery objective.

    Stops when both successive-iterate distances fall below `iterate_tol` or
    after `max_iters` cycles. With q = 1 this is the constant-weight ternary
    cycle; larger alphabets adapt the weights as described in the module
    docstring.
    """
    z0 = np.zeros(problem.n)
    state, converged, last_step, iters = _madmm_loop(problem, alphabet, config, z0, callback)
    return _finish(state, problem, alphabet, config, iters, 0, converged, last_step)


def solve_madmm_r(
    problem: Problem,
    alphabet: Alphabet,
    config: SolverConfig,
    callback=None,
) -> RecoveryResult:
    """Solver with random restarts until the estimate is (near) alphabet-valued.

    After a run whose relative square distance to the lattice is at least
    `exact_tol`, z is reinitialized uniformly on the hull box, the dual
    variable is reset, and the solve repeats, up to `max_reshuffles` restarts.
    Returns the first exact estimate, or the best-objective one if the budget
    runs out. Iteration counts accumulate across restarts.
    """
    rng = np.random.Generator(np.random.Philox(config.seed))
    hull = alphabet.hull_bound
    n = problem.n
    total_iters = 0
    best: RecoveryResult | None = None
    reshuffles = 0
    for attempt in range(config.max_reshuffles + 1):
        reshuffles = attempt
        z0 = np.zeros(n) if attempt == 0 else rng.uniform(-hull, hull, size=n)
        state, converged, last_step, iters = _madmm_loop(problem, alphabet, config, z0, callback)
        total_iters += iters
        result = _finish(state, problem, alphabet, config, iters, attempt, converged, last_step)
        if best is None or result.objective < best.objective:
            best = result
        if result.exact:
            best = result
            break
    return replace(best, iterations=total_iters, reshuffles=reshuffles)
