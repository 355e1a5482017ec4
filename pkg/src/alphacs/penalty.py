"""Concave penalty, quantized weights, and the two recovery objectives.

The scalar penalty is quadratic-minus-linear inside [-d, d] and saturates at
d^2/2 outside, so summed over components it rewards pushing nonzero entries to
the lattice points. The ternary objective pairs it with a least-squares data
term; the generic-alphabet objective replaces the constant weight d by the
per-component quantized magnitude weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Alphabet

__all__ = [
    "ObjectiveParams",
    "mcp_g",
    "concave_G",
    "beta_weight",
    "beta_weights",
    "objective_F",
    "objective_H",
]

# Solver iterates touch the box boundary; overshoot up to this relative slack
# is clamped instead of rejected.
BOX_SLACK = 1e-12


@dataclass(frozen=True)
class ObjectiveParams:
    """Regularization weight and alphabet shared by both objectives."""

    lam: float
    alphabet: Alphabet

    def __post_init__(self):
        if not (self.lam > 0):
            raise ValueError(f"regularization weight must be positive, got {self.lam}")


def mcp_g(z, d: float):
    """Scalar concave penalty: d|z| - z^2/2 for |z| <= d, else d^2/2."""
    if not (d > 0):
        raise ValueError("d must be positive")
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    out = np.where(a <= d, d * a - 0.5 * z * z, 0.5 * d * d)
    return float(out) if out.ndim == 0 else out


def _clamped(x, bound: float, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    slack = BOX_SLACK * max(1.0, bound)
    if np.any(np.abs(x) > bound + slack):
        worst = float(np.max(np.abs(x)))
        raise ValueError(f"{what}: component magnitude {worst} exceeds box bound {bound}")
    return np.clip(x, -bound, bound)


def concave_G(x, d: float) -> float:
    """d*||x||_1 - ||x||_2^2 / 2 on the box [-d, d]^n; equals the summed scalar penalty there."""
    if not (d > 0):
        raise ValueError("d must be positive")
    x = _clamped(x, d, "concave_G")
    return float(d * np.sum(np.abs(x)) - 0.5 * np.dot(x, x))


def beta_weights(x, alphabet: Alphabet) -> np.ndarray:
    """Componentwise smallest nonnegative symbol >= |x_i| (vectorized).

    Ratios a few ulps above an exact multiple of d (division round-off) are
    snapped down so that values sitting on a symbol keep that symbol's weight.
    """
    x = _clamped(x, alphabet.hull_bound, "beta_weights")
    ratio = np.abs(x) / alphabet.d
    level = np.ceil(ratio * (1.0 - 4.0 * np.finfo(float).eps))
    return np.minimum(level, alphabet.q) * alphabet.d


def beta_weight(x_i: float, alphabet: Alphabet) -> float:
    """Smallest nonnegative symbol >= |x_i|; the comparison is inclusive at symbols."""
    return float(beta_weights(np.asarray([x_i]), alphabet)[0])


def objective_F(x, problem, params: ObjectiveParams) -> float:
    """Ternary objective: ||y - Ax||^2/2 + lam*d*||x||_1 - lam*||x||_2^2/2."""
    if not params.alphabet.ternary:
        raise ValueError("the ternary objective requires q = 1")
    d = params.alphabet.d
    x = _clamped(x, d, "objective_F")
    r = problem.y - problem.A @ x
    return float(0.5 * np.dot(r, r) + params.lam * concave_G(x, d))


def objective_H(x, problem, params: ObjectiveParams) -> float:
    """Generic-alphabet objective with quantized per-component weights.

    ||y - Ax||^2/2 + lam * sum_i beta_i(x_i)|x_i| - lam*||x||_2^2/2 on the
    hull box [-q*d, q*d]^n. Coincides with the ternary objective when q = 1.
    """
    alphabet = params.alphabet
    x = _clamped(x, alphabet.hull_bound, "objective_H")
    r = problem.y - problem.A @ x
    weighted_l1 = float(np.dot(beta_weights(x, alphabet), np.abs(x)))
    return float(0.5 * np.dot(r, r) + params.lam * (weighted_l1 - 0.5 * np.dot(x, x)))
