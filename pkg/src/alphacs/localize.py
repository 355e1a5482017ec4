"""Multiple-target localization on a cell grid via sparse binary recovery.

A square area is split into cells; randomly placed sensors record received
signal strength from a transmitter placed in each cell, giving an RSS
dictionary. Occupied cells are then recovered as the support of a sparse
binary vector from one RSS measurement per sensor. The dictionary rows are
whitened first so the sensing matrix has orthonormal rows.

The path-loss law is a standard two-slope log-distance model (20 dB/decade up
to a breakpoint, 33 dB/decade beyond); every constant is a parameter since
only the geometry-dependence of the dictionary matters here.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import csvio
from .baselines import BaselineConfig, solve_lasso_admm
from .model import Alphabet, Problem, add_measurement_noise, derive_seeds, philox_rng
from .solver import SolverConfig, solve_madmm

__all__ = [
    "RssParams",
    "Grid",
    "SensorLayout",
    "LocalizationRecord",
    "path_loss_db",
    "rss_model",
    "build_dictionary",
    "orthogonalize",
    "localize_targets",
    "localization_error",
    "run_localization_sweep",
    "write_localization_csv",
]


@dataclass(frozen=True)
class RssParams:
    """Two-slope log-distance path loss with a distance floor."""

    tx_power_db: float = 0.0
    near_offset_db: float = 40.2
    near_slope_db: float = 20.0
    far_offset_db: float = 58.5
    far_slope_db: float = 33.0
    breakpoint_m: float = 8.0
    min_distance_m: float = 0.1


@dataclass(frozen=True)
class Grid:
    """Square area split into square cells; cell centers are the candidate positions."""

    side_m: float = 20.0
    cells_per_side: int = 10

    def __post_init__(self):
        if self.side_m <= 0 or self.cells_per_side < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def n(self) -> int:
        return self.cells_per_side**2

    @property
    def cell_side_m(self) -> float:
        return self.side_m / self.cells_per_side

    def centers(self) -> np.ndarray:
        """n x 2 array of cell centers, row-major over (row, col)."""
        half = self.cell_side_m / 2.0
        coords = [
            (r * self.cell_side_m + half, c * self.cell_side_m + half)
            for r in range(self.cells_per_side)
            for c in range(self.cells_per_side)
        ]
        return np.asarray(coords, dtype=float)


@dataclass(frozen=True)
class SensorLayout:
    """Sensor coordinates inside the area."""

    positions: np.ndarray

    def __post_init__(self):
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "positions", positions)
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError("sensor positions must be an m x 2 array")

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def random(cls, m: int, grid: Grid, seed: int) -> "SensorLayout":
        """m sensors deployed uniformly at random over the area."""
        if m < 1:
            raise ValueError("need at least one sensor")
        rng = philox_rng(seed)
        return cls(positions=rng.uniform(0.0, grid.side_m, size=(m, 2)))


def path_loss_db(distance_m, params: RssParams = RssParams()):
    """Path loss in dB at a given distance; distances are floored first."""
    dist = np.maximum(np.asarray(distance_m, dtype=float), params.min_distance_m)
    near = params.near_offset_db + params.near_slope_db * np.log10(dist)
    far = params.far_offset_db + params.far_slope_db * np.log10(dist / params.breakpoint_m)
    out = np.where(dist <= params.breakpoint_m, near, far)
    return float(out) if out.ndim == 0 else out


def rss_model(distance_m, params: RssParams = RssParams()):
    """Received signal strength in dB: transmit power minus path loss."""
    return params.tx_power_db - path_loss_db(distance_m, params)


def build_dictionary(
    grid: Grid,
    layout: SensorLayout,
    params: RssParams = RssParams(),
    train_snr_db: float | None = 25.0,
    seed: int = 0,
) -> np.ndarray:
    """m x n matrix of RSS readings: sensor s from a transmitter at cell center c.

    Training noise at `train_snr_db` is added to the column-stacked clean
    dictionary with the same SNR convention as measurement noise; None or
    infinity means a clean dictionary.
    """
    centers = grid.centers()
    diff = layout.positions[:, None, :] - centers[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    A = rss_model(dist, params)
    if train_snr_db is None or math.isinf(train_snr_db):
        return A
    stacked = A.ravel(order="F")
    noisy, _ = add_measurement_noise(stacked, train_snr_db, seed)
    return noisy.reshape(A.shape, order="F")


def orthogonalize(A, y):
    """Row-whiten the system: returns (MA, My) with M = (A A^T)^(-1/2).

    The transformed matrix has orthonormal rows and, for full-row-rank A, the
    same solution set as the original system.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    evals, evecs = np.linalg.eigh(A @ A.T)
    if evals.min() <= 1e-12 * max(evals.max(), 1.0):
        raise ValueError("A A^T is numerically singular: cannot orthogonalize rows")
    M = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.T
    return M @ A, M @ y


def localize_targets(
    A_orth,
    y_orth,
    k: int,
    solver_choice: str,
    config: SolverConfig,
    grid: Grid = Grid(),
):
    """Recover the k most likely occupied cells from whitened RSS measurements.

    Runs the chosen solver with the unit binary-lattice settings (d = 1) and
    returns the cell indices (ascending) and center coordinates of the k
    largest-magnitude components; magnitude ties break toward the lower cell
    index. Also returns the solver iteration count.
    """
    if k < 1:
        raise ValueError("need at least one target")
    problem = Problem(A=np.asarray(A_orth, float), y=np.asarray(y_orth, float))
    alphabet = Alphabet(d=1.0, q=1)
    if solver_choice == "madmm":
        result = solve_madmm(problem, alphabet, config)
    elif solver_choice == "lasso":
        base = BaselineConfig(
            lam=config.lam,
            alpha=config.alpha,
            max_iters=config.max_iters,
            iterate_tol=config.iterate_tol,
            quantize_output=False,
        )
        result = solve_lasso_admm(problem, base, alphabet)
    else:
        raise ValueError(f"unknown solver {solver_choice!r} (use madmm or lasso)")
    estimate = result.raw_estimate if result.raw_estimate is not None else result.estimate
    order = np.lexsort((np.arange(estimate.size), -np.abs(estimate)))
    cells = np.sort(order[:k])
    positions = grid.centers()[cells]
    return cells, positions, result.iterations


def localization_error(true_positions, est_positions) -> float:
    """Minimum over target assignments of the mean Euclidean distance (meters)."""
    true_positions = np.atleast_2d(np.asarray(true_positions, dtype=float))
    est_positions = np.atleast_2d(np.asarray(est_positions, dtype=float))
    if true_positions.shape != est_positions.shape:
        raise ValueError("position lists must have equal shape")
    k = true_positions.shape[0]
    if k > 8:
        raise ValueError("assignment search is exhaustive; limited to k <= 8")
    best = math.inf
    for perm in itertools.permutations(range(k)):
        dist = np.linalg.norm(true_positions - est_positions[list(perm)], axis=1)
        best = min(best, float(np.mean(dist)))
    return best


@dataclass(frozen=True)
class LocalizationRecord:
    m: int
    seed: int
    solver: str
    loc_error_m: float
    iterations: int


def run_localization_trial(
    m: int,
    trial: int,
    master_seed: int,
    solvers,
    k: int = 4,
    lam: float = 1e-3,
    alpha: float = 1.0,
    iterate_tol: float = 1e-8,
    max_iters: int = 5000,
    train_snr_db: float | None = 25.0,
    meas_noise_std: float | None = None,
    grid: Grid = Grid(),
    params: RssParams = RssParams(),
):
    """One shared instance (layout, dictionary, targets) solved by each method."""
    record_seed, layout_seed, train_seed, target_seed, noise_seed = derive_seeds(
        master_seed, (m, trial), 5
    )
    layout = SensorLayout.random(m, grid, layout_seed)
    clean = build_dictionary(grid, layout, params, train_snr_db=None)
    trained = build_dictionary(grid, layout, params, train_snr_db=train_snr_db, seed=train_seed)
    rng = philox_rng(target_seed)
    cells = np.sort(rng.choice(grid.n, size=k, replace=False))
    x_true = np.zeros(grid.n)
    x_true[cells] = 1.0
    y = clean @ x_true
    if meas_noise_std is not None:
        y = y + philox_rng(noise_seed).normal(0.0, meas_noise_std, size=m)
    A_orth, y_orth = orthogonalize(trained, y)
    config = SolverConfig(
        lam=lam, alpha=alpha, max_iters=max_iters, iterate_tol=iterate_tol
    )
    true_positions = grid.centers()[cells]
    records = []
    for solver in solvers:
        _, est_positions, iterations = localize_targets(
            A_orth, y_orth, k, solver, config, grid
        )
        records.append(
            LocalizationRecord(
                m=m,
                seed=record_seed,
                solver=solver,
                loc_error_m=localization_error(true_positions, est_positions),
                iterations=iterations,
            )
        )
    return records


def run_localization_sweep(
    m_values,
    trials: int,
    master_seed: int,
    solvers=("madmm", "lasso"),
    workers: int = 1,
    **kwargs,
) -> list[LocalizationRecord]:
    """Localization trials for each sensor count; deterministic given the seed.

    Trials are independent and seeded per (m, trial), so results do not depend
    on the worker count.
    """
    jobs = [(int(m), trial) for m in m_values for trial in range(trials)]
    records: list[LocalizationRecord] = []
    if workers <= 1:
        for m, trial in jobs:
            records.extend(run_localization_trial(m, trial, master_seed, solvers, **kwargs))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for recs in pool.map(
                lambda job: run_localization_trial(job[0], job[1], master_seed, solvers, **kwargs),
                jobs,
            ):
                records.extend(recs)
    records.sort(key=lambda r: (r.solver, r.m, r.seed))
    return records


def write_localization_csv(path, records) -> None:
    with open(path, "w") as fh:
        fh.write("m,seed,solver,loc_error_m,iterations\n")
        for r in records:
            fh.write(
                f"{r.m},{r.seed},{r.solver},{csvio.format_float(r.loc_error_m)},{r.iterations}\n"
            )
