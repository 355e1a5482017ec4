"""Domain types and seeded generators for finite-alphabet sparse recovery.

An alphabet is the symmetric lattice d*{0, +-1, ..., +-q}; a signal is a
k-sparse vector with every nonzero entry drawn from the alphabet; a problem
bundles a sensing matrix with (possibly noisy) linear measurements of such a
signal.

All randomness goes through counter-based Philox streams keyed by explicit
integer seeds, so equal seeds give bit-identical output whether trials run
serially or in parallel. Gaussian variates come from numpy's ziggurat sampler
on top of Philox; changing either would change the streams, so both are
pinned here as the reference sampling method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Alphabet",
    "SparseSignal",
    "Problem",
    "make_problem",
    "gen_gaussian_matrix",
    "gen_signal",
    "add_measurement_noise",
    "derive_seeds",
    "philox_rng",
]


def philox_rng(seed) -> np.random.Generator:
    """Counter-based generator for a single named stream."""
    return np.random.Generator(np.random.Philox(seed))


def derive_seeds(master_seed: int, path, count: int) -> tuple[int, ...]:
    """Derive `count` independent child seeds from a master seed and an index path.

    The path (e.g. ``(grid_index, trial)``) keys the stream so that parallel
    and serial sweeps agree bit-for-bit.
    """
    entropy = [int(master_seed)] + [int(p) for p in path]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds and path indices must be non-negative")
    ss = np.random.SeedSequence(entropy)
    return tuple(int(s) for s in ss.generate_state(count, dtype=np.uint64))


@dataclass(frozen=True)
class Alphabet:
    """Symmetric finite alphabet d*{0, +-1, ..., +-q}.

    `d` is the symbol spacing, `q` the maximum level; the convex hull of the
    symbol set is the box [-q*d, q*d].
    """

    d: float
    q: int = 1

    def __post_init__(self):
        if not (float(self.d) > 0.0) or not math.isfinite(self.d):
            raise ValueError(f"symbol spacing d must be positive and finite, got {self.d}")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"max level q must be an integer >= 1, got {self.q}")

    @property
    def hull_bound(self) -> float:
        return self.q * self.d

    @property
    def ternary(self) -> bool:
        return self.q == 1

    def symbols(self) -> np.ndarray:
        """All 2q+1 symbols, ascending."""
        return self.d * np.arange(-self.q, self.q + 1, dtype=float)

    def nonzero_symbols(self) -> np.ndarray:
        """The 2q nonzero symbols, ascending."""
        levels = np.concatenate([np.arange(-self.q, 0), np.arange(1, self.q + 1)])
        return self.d * levels.astype(float)

    def quantize(self, x) -> np.ndarray:
        """Nearest symbol componentwise; ties go to the smaller magnitude."""
        x = np.asarray(x, dtype=float)
        level = np.ceil(np.abs(x) / self.d - 0.5)
        level = np.minimum(level, self.q)
        return np.sign(x) * level * self.d


@dataclass(frozen=True)
class SparseSignal:
    """A sparse vector together with its support index set."""

    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        support = np.asarray(self.support, dtype=int)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", np.sort(support))
        if values.ndim != 1:
            raise ValueError("signal values must be a 1-D vector")
        if support.size != np.unique(support).size:
            raise ValueError("support indices must be distinct")
        if support.size and (support.min() < 0 or support.max() >= values.size):
            raise ValueError("support index out of range")
        off = np.setdiff1d(np.arange(values.size), support)
        if off.size and np.any(values[off] != 0.0):
            raise ValueError("entries off the support must be exactly zero")

    @classmethod
    def from_values(cls, values, alphabet: Alphabet | None = None) -> "SparseSignal":
        """Build a signal from a dense vector, deriving the support.

        If `alphabet` is given, every nonzero entry must be one of its symbols.
        """
        values = np.asarray(values, dtype=float)
        support = np.flatnonzero(values)
        if alphabet is not None:
            nz = values[support]
            if np.any(np.abs(nz - alphabet.quantize(nz)) > 1e-12 * alphabet.d):
                raise ValueError("nonzero entries are not alphabet symbols")
            if np.any(np.abs(nz) > alphabet.hull_bound * (1 + 1e-12)):
                raise ValueError("entry magnitude exceeds the largest symbol")
        return cls(values=values, support=support)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def k(self) -> int:
        return self.support.size


@dataclass(frozen=True)
class Problem:
    """A sensing matrix with measurements, plus optional ground truth and noise records."""

    A: np.ndarray
    y: np.ndarray
    truth: SparseSignal | None = None
    signal_noise: np.ndarray | None = None
    meas_noise: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        if A.ndim != 2:
            raise ValueError("sensing matrix must be 2-D")
        if y.ndim != 1 or y.size != A.shape[0]:
            raise ValueError(
                f"measurement length {y.size} does not match matrix rows {A.shape[0]}"
            )
        if self.truth is not None and self.truth.n != A.shape[1]:
            raise ValueError("truth length does not match matrix columns")
        if self.signal_noise is not None and np.asarray(self.signal_noise).size != A.shape[1]:
            raise ValueError("signal noise length does not match matrix columns")
        if self.meas_noise is not None and np.asarray(self.meas_noise).size != A.shape[0]:
            raise ValueError("measurement noise length does not match matrix rows")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def make_problem(
    A,
    truth: SparseSignal,
    signal_noise=None,
    meas_noise=None,
) -> Problem:
    """Construct a problem with y = A(x + delta) + eps computed from its parts."""
    A = np.asarray(A, dtype=float)
    x = truth.values
    if signal_noise is not None:
        x = x + np.asarray(signal_noise, dtype=float)
    y = A @ x
    if meas_noise is not None:
        y = y + np.asarray(meas_noise, dtype=float)
    return Problem(A=A, y=y, truth=truth, signal_noise=signal_noise, meas_noise=meas_noise)


def gen_gaussian_matrix(m: int, n: int, seed: int) -> np.ndarray:
    """m x n matrix with i.i.d. Gaussian entries of mean 0 and variance 1/m."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    rng = philox_rng(seed)
    return rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, n))


def gen_signal(n: int, k: int, alphabet: Alphabet, seed: int) -> SparseSignal:
    """k-sparse signal: uniform random support, nonzeros uniform over the nonzero symbols."""
    if k < 0 or k > n:
        raise ValueError(f"sparsity k={k} must lie in [0, n={n}]")
    rng = philox_rng(seed)
    support = np.sort(rng.choice(n, size=k, replace=False)) if k else np.empty(0, dtype=int)
    values = np.zeros(n)
    if k:
        symbols = alphabet.nonzero_symbols()
        values[support] = symbols[rng.integers(0, symbols.size, size=k)]
    return SparseSignal(values=values, support=support)


def add_measurement_noise(y_clean, snr_db, seed: int):
    """Add white Gaussian noise at a target SNR (dB) to a measurement vector.

    Per-component standard deviation is ||y||_2 / (sqrt(m) * 10^(snr/20)), so
    the expected noise energy matches the signal energy scaled by the SNR.
    `snr_db=None` or infinity means no noise. Returns (y_noisy, noise).
    """
    y_clean = np.asarray(y_clean, dtype=float)
    if snr_db is None or math.isinf(snr_db):
        eps = np.zeros_like(y_clean)
        return y_clean.copy(), eps
    norm = float(np.linalg.norm(y_clean))
    if norm == 0.0:
        raise ValueError("cannot set an SNR relative to a zero measurement vector")
    m = y_clean.size
    sigma = norm / (math.sqrt(m) * 10.0 ** (snr_db / 20.0))
    eps = philox_rng(seed).normal(0.0, sigma, size=m)
    return y_clean + eps, eps
