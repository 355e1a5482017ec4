"""Recoverability certificates and brute-force oracles.

The certificates test positivity of small quadratic forms: for a candidate
support S, recovery of lattice signals supported on S is guaranteed when the
symmetric matrix (1/lam) A^T A + w_off * I_{S^c} - w_on * I_S has positive
eigenvalues (w_off = d, w_on = 1 in the ternary case; w_off = 1, w_on = q for
a generic alphabet). Checking every support of size up to k makes the test
support-free but combinatorial, so enumeration is guarded by an explicit
budget.

The lattice kernel check rules out spurious lattice-valued stationary points:
difference vectors between two ternary signals have components in
d*{0,+-1,+-2}, so it is enough that no such nonzero vector lies in
ker(A_S^T A).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BudgetExceededError
from .model import Alphabet, Problem

__all__ = [
    "SupportCertificate",
    "CertificateReport",
    "certificate_ternary",
    "certificate_generic",
    "certify_all_supports",
    "kernel_general_position_check",
    "brute_force_minimizer",
]

# Eigenvalues above this count as positive; absorbs symmetric-eigensolver noise.
EIG_POS_TOL = 1e-10


@dataclass(frozen=True)
class SupportCertificate:
    support: tuple[int, ...]
    min_eig: float


@dataclass(frozen=True)
class CertificateReport:
    """Worst-case eigenvalue certificate over all supports up to size k."""

    entries: tuple[SupportCertificate, ...]
    worst_support: tuple[int, ...]
    worst_min_eig: float
    passed: bool
    lam: float
    alphabet: Alphabet
    k: int


def _min_eig(A: np.ndarray, lam: float, on_support: float, off_support: float, support) -> float:
    n = A.shape[1]
    support = np.asarray(sorted(support), dtype=int)
    if support.size and (support.min() < 0 or support.max() >= n):
        raise ValueError("support index out of range")
    diag = np.full(n, off_support)
    diag[support] = -on_support
    M = A.T @ A / lam
    M[np.diag_indices_from(M)] += diag
    return float(np.linalg.eigvalsh(M).min())


def certificate_ternary(A, lam: float, d: float, support) -> float:
    """Min eigenvalue of (1/lam) A^T A + d I_{S^c} - I_S."""
    if not (lam > 0):
        raise ValueError("lam must be positive")
    return _min_eig(np.asarray(A, dtype=float), lam, 1.0, d, support)


def certificate_generic(A, lam: float, q: int, support) -> float:
    """Min eigenvalue of (1/lam) A^T A + I_{S^c} - q I_S."""
    if not (lam > 0):
        raise ValueError("lam must be positive")
    return _min_eig(np.asarray(A, dtype=float), lam, float(q), 1.0, support)


def certify_all_supports(
    A,
    lam: float,
    alphabet: Alphabet,
    k: int,
    max_supports: int = 1_000_000,
) -> CertificateReport:
    """Evaluate the certificate over every support of size 0..k.

    Refuses with the total count when the enumeration exceeds `max_supports`.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if k < 0 or k > n:
        raise ValueError(f"support size k={k} must lie in [0, n={n}]")
    total = sum(math.comb(n, j) for j in range(k + 1))
    if total > max_supports:
        raise BudgetExceededError(
            f"{total} supports exceed the enumeration budget of {max_supports}",
            count=total,
            budget=max_supports,
        )
    base = A.T @ A / lam
    if alphabet.ternary:
        on, off = 1.0, alphabet.d
    else:
        on, off = float(alphabet.q), 1.0
    entries = []
    worst = None
    for j in range(k + 1):
        for support in itertools.combinations(range(n), j):
            diag = np.full(n, off)
            if support:
                diag[list(support)] = -on
            M = base.copy()
            M[np.diag_indices_from(M)] += diag
            min_eig = float(np.linalg.eigvalsh(M).min())
            entry = SupportCertificate(support=support, min_eig=min_eig)
            entries.append(entry)
            if worst is None or min_eig < worst.min_eig:
                worst = entry
    return CertificateReport(
        entries=tuple(entries),
        worst_support=worst.support,
        worst_min_eig=worst.min_eig,
        passed=worst.min_eig > EIG_POS_TOL,
        lam=lam,
        alphabet=alphabet,
        k=k,
    )


def kernel_general_position_check(
    A,
    support,
    d: float,
    max_n: int = 14,
    rtol: float = 1e-9,
) -> bool:
    """True iff no nonzero vector in (d*{0,+-1,+-2})^n lies in ker(A_S^T A).

    Exhausts the 5^n - 1 candidates (minus the sign symmetry: only vectors
    whose first nonzero component is positive are scanned, since h and -h are
    equivalent) in vectorized blocks, exiting early on the first hit.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if n > max_n:
        raise BudgetExceededError(
            f"kernel scan over 5^{n} candidates refused (limit n <= {max_n})",
            count=5**n - 1,
            budget=5**max_n,
        )
    support = np.asarray(sorted(support), dtype=int)
    if support.size == 0:
        return False  # no equations: every lattice vector is in the kernel
    M = A[:, support].T @ A  # |S| x n
    tol = rtol * d * max(1.0, float(np.abs(M).max()))
    values = d * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    total = 5**n
    chunk = 200_000
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.empty((n, codes.size), dtype=np.int64)
        rem = codes
        for i in range(n - 1, -1, -1):
            rem, digits[i] = np.divmod(rem, 5)
        H = values[digits]  # n x chunk
        # sign symmetry: keep candidates whose first nonzero component is positive
        signs = np.sign(H)
        first_nz = np.argmax(signs != 0, axis=0)
        lead = signs[first_nz, np.arange(H.shape[1])]
        keep = lead > 0
        if not np.any(keep):
            continue
        R = M @ H[:, keep]
        if np.any(np.max(np.abs(R), axis=0) <= tol):
            return False
    return True


def brute_force_minimizer(
    problem: Problem,
    alphabet: Alphabet,
    lam: float,
    mode: str = "alphabet",
    grid_points: int = 41,
    max_candidates: int = 10_000_000,
) -> np.ndarray:
    """Global minimizer of the recovery objective by exhaustive enumeration.

    mode "alphabet" scans the lattice (2q+1)^n; mode "grid" scans a uniform
    grid of the hull box with `grid_points` per axis. Ties break toward the
    lexicographically smallest candidate. Guarded by `max_candidates`.
    """
    if mode not in ("alphabet", "grid"):
        raise ValueError(f"unknown mode {mode!r}")
    n = problem.n
    if mode == "alphabet":
        axis = alphabet.symbols()
    else:
        if grid_points < 2:
            raise ValueError("grid mode needs at least 2 points per axis")
        axis = np.linspace(-alphabet.hull_bound, alphabet.hull_bound, grid_points)
    base = axis.size
    total = base**n
    if total > max_candidates:
        raise BudgetExceededError(
            f"{base}^{n} = {total} candidates exceed the budget of {max_candidates}",
            count=total,
            budget=max_candidates,
        )
    A, y = problem.A, problem.y
    best_val = math.inf
    best_x = None
    chunk = 100_000
    lam_half = 0.5 * lam
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.empty((n, codes.size), dtype=np.int64)
        rem = codes
        for i in range(n - 1, -1, -1):
            rem, digits[i] = np.divmod(rem, base)
        X = axis[digits]  # n x chunk, ascending codes = lexicographic order
        R = y[:, None] - A @ X
        data = 0.5 * np.sum(R * R, axis=0)
        if alphabet.ternary:
            pen = lam * alphabet.d * np.sum(np.abs(X), axis=0) - lam_half * np.sum(X * X, axis=0)
        else:
            level = np.ceil(np.abs(X) / alphabet.d * (1.0 - 4.0 * np.finfo(float).eps))
            beta = np.minimum(level, alphabet.q) * alphabet.d
            pen = lam * np.sum(beta * np.abs(X), axis=0) - lam_half * np.sum(X * X, axis=0)
        vals = data + pen
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_x = X[:, i].copy()
    return best_x
