"""Benchmark harness: seeded sweeps over measurement count, sparsity, and SNR.

Every trial draws its sensing matrix, signal, and noise from streams keyed by
(master seed, grid index, trial index), so all solvers within a trial see
bit-identical data, output is independent of worker count, and reruns
reproduce files exactly (timing column aside).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import csvio
from .baselines import BaselineConfig, solve_bp_admm, solve_lasso_admm
from .exceptions import NumericalFailureError
from .model import Alphabet, add_measurement_noise, derive_seeds, gen_gaussian_matrix, gen_signal, make_problem
from .solver import SolverConfig, solve_madmm, solve_madmm_r

__all__ = [
    "SOLVER_NAMES",
    "ExperimentSpec",
    "TrialRecord",
    "SummaryRow",
    "rse",
    "exact_recovery",
    "run_trial",
    "run_sweep",
    "aggregate",
    "write_records_csv",
    "read_records_csv",
    "write_summary_csv",
]

SOLVER_NAMES = ("madmm", "madmm_r", "lasso", "bp")

CSV_COLUMNS = (
    "solver",
    "m",
    "n",
    "k",
    "q",
    "d",
    "snr_db",
    "seed",
    "trial",
    "rse",
    "exact",
    "iterations",
    "reshuffles",
    "runtime_s",
    "status",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: grid of (m, k) points, optional SNR, repeated trials per point."""

    n: int
    k_values: tuple[int, ...]
    m_values: tuple[int, ...]
    alphabet: Alphabet
    solvers: tuple[str, ...]
    trials: int = 100
    seed: int = 0
    snr_db: float | None = None
    lam: float = 1e-2
    alpha: float = 1.0
    iterate_tol: float = 1e-12
    exact_tol: float = 1e-4
    max_iters: int = 5000
    max_reshuffles: int = 50
    exact_match_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "solvers", tuple(self.solvers))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.k_values or not self.m_values:
            raise ValueError("m and k ranges must be nonempty")
        unknown = set(self.solvers) - set(SOLVER_NAMES)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)}")
        if not self.solvers:
            raise ValueError("at least one solver is required")
        if "bp" in self.solvers and self.snr_db is not None and not math.isinf(self.snr_db):
            raise ValueError("bp solves an equality-constrained problem: noise-free runs only")

    def grid(self) -> list[tuple[int, int]]:
        return [(m, k) for m in self.m_values for k in self.k_values]


@dataclass(frozen=True)
class TrialRecord:
    solver: str
    m: int
    n: int
    k: int
    q: int
    d: float
    snr_db: float
    seed: int
    trial: int
    rse: float
    exact: int
    iterations: int
    reshuffles: int
    runtime_s: float
    status: str

    def sort_key(self):
        return (self.solver, self.m, self.k, self.snr_db, self.trial)


@dataclass(frozen=True)
class SummaryRow:
    solver: str
    m: int
    k: int
    snr_db: float
    count: int
    mean_rse: float
    std_rse: float
    exact_rate: float
    mean_iterations: float
    std_iterations: float
    mean_runtime_s: float


def rse(estimate, truth) -> float:
    """Relative square error ||truth - estimate||^2 / ||truth||^2."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    den = float(truth @ truth)
    if den == 0.0:
        raise ValueError("relative square error is undefined for a zero truth vector")
    diff = truth - estimate
    return float(diff @ diff) / den


def exact_recovery(estimate, truth, tol: float = 1e-6) -> bool:
    """Componentwise max-abs agreement within `tol`."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth must have equal length")
    return bool(np.max(np.abs(estimate - truth), initial=0.0) <= tol)


def _solve_one(solver: str, problem, alphabet, spec: ExperimentSpec, solver_seed: int):
    if solver in ("madmm", "madmm_r"):
        config = SolverConfig(
            lam=spec.lam,
            alpha=spec.alpha,
            max_iters=spec.max_iters,
            iterate_tol=spec.iterate_tol,
            exact_tol=spec.exact_tol,
            max_reshuffles=spec.max_reshuffles,
            seed=solver_seed,
        )
        fn = solve_madmm if solver == "madmm" else solve_madmm_r
        return fn(problem, alphabet, config)
    config = BaselineConfig(
        lam=spec.lam,
        alpha=spec.alpha,
        max_iters=spec.max_iters,
        iterate_tol=spec.iterate_tol,
        quantize_output=True,
    )
    fn = solve_lasso_admm if solver == "lasso" else solve_bp_admm
    return fn(problem, config, alphabet)


def run_trial(spec: ExperimentSpec, grid_index: int, trial: int, measure_runtime: bool = True):
    """Run every listed solver on one shared instance; returns records."""
    m, k = spec.grid()[grid_index]
    record_seed, matrix_seed, signal_seed, noise_seed, solver_seed = derive_seeds(
        spec.seed, (grid_index, trial), 5
    )
    A = gen_gaussian_matrix(m, spec.n, matrix_seed)
    truth = gen_signal(spec.n, k, spec.alphabet, signal_seed)
    problem = make_problem(A, truth)
    snr = math.inf if spec.snr_db is None else float(spec.snr_db)
    if not math.isinf(snr):
        _, eps = add_measurement_noise(problem.y, snr, noise_seed)
        problem = make_problem(A, truth, meas_noise=eps)
    records = []
    for solver in spec.solvers:
        start = time.perf_counter()
        status = "ok"
        try:
            result = _solve_one(solver, problem, spec.alphabet, spec, solver_seed)
            quantized = spec.alphabet.quantize(result.estimate)
            trial_rse = rse(result.estimate, truth.values)
            exact = int(exact_recovery(quantized, truth.values, spec.exact_match_tol))
            iterations = result.iterations
            reshuffles = result.reshuffles
        except NumericalFailureError:
            status = "numerical_failure"
            trial_rse = math.nan
            exact = 0
            iterations = 0
            reshuffles = 0
        runtime = time.perf_counter() - start if measure_runtime else 0.0
        records.append(
            TrialRecord(
                solver=solver,
                m=m,
                n=spec.n,
                k=k,
                q=spec.alphabet.q,
                d=spec.alphabet.d,
                snr_db=snr,
                seed=record_seed,
                trial=trial,
                rse=trial_rse,
                exact=exact,
                iterations=iterations,
                reshuffles=reshuffles,
                runtime_s=runtime,
                status=status,
            )
        )
    return records


def run_sweep(spec: ExperimentSpec, workers: int = 1, measure_runtime: bool = True):
    """All grid points x trials x solvers, deterministically ordered.

    Trials may run on several threads; per-trial seed derivation keeps results
    identical regardless of scheduling, and records are sorted before return.
    """
    jobs = [(gi, t) for gi in range(len(spec.grid())) for t in range(spec.trials)]
    records: list[TrialRecord] = []
    if workers <= 1:
        for gi, t in jobs:
            records.extend(run_trial(spec, gi, t, measure_runtime))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for recs in pool.map(lambda job: run_trial(spec, *job, measure_runtime), jobs):
                records.extend(recs)
    records.sort(key=TrialRecord.sort_key)
    return records


def aggregate(records) -> list[SummaryRow]:
    """Per (solver, m, k, snr): mean/std RSE, exact rate, mean iterations and runtime.

    Failed trials keep their place in the denominator of the exact rate but
    are excluded from the RSE and iteration means.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.solver, rec.m, rec.k, rec.snr_db), []).append(rec)
    rows = []
    for (solver, m, k, snr), recs in sorted(groups.items()):
        ok = [r for r in recs if r.status == "ok"]
        rses = np.array([r.rse for r in ok], dtype=float)
        iters = np.array([r.iterations for r in ok], dtype=float)
        rows.append(
            SummaryRow(
                solver=solver,
                m=m,
                k=k,
                snr_db=snr,
                count=len(recs),
                mean_rse=float(np.mean(rses)) if ok else math.nan,
                std_rse=float(np.std(rses, ddof=1)) if len(ok) > 1 else 0.0,
                exact_rate=sum(r.exact for r in recs) / len(recs),
                mean_iterations=float(np.mean(iters)) if ok else math.nan,
                std_iterations=float(np.std(iters, ddof=1)) if len(ok) > 1 else 0.0,
                mean_runtime_s=float(np.mean([r.runtime_s for r in ok])) if ok else math.nan,
            )
        )
    return rows


def write_records_csv(path, records) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(
                ",".join(
                    [
                        r.solver,
                        str(r.m),
                        str(r.n),
                        str(r.k),
                        str(r.q),
                        csvio.format_float(r.d),
                        csvio.format_float(r.snr_db),
                        str(r.seed),
                        str(r.trial),
                        csvio.format_float(r.rse),
                        str(r.exact),
                        str(r.iterations),
                        str(r.reshuffles),
                        csvio.format_float(r.runtime_s),
                        r.status,
                    ]
                )
                + "\n"
            )


def read_records_csv(path) -> list[TrialRecord]:
    records = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(CSV_COLUMNS):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} cells")
            records.append(
                TrialRecord(
                    solver=cells[0],
                    m=int(cells[1]),
                    n=int(cells[2]),
                    k=int(cells[3]),
                    q=int(cells[4]),
                    d=float(cells[5]),
                    snr_db=float(cells[6]),
                    seed=int(cells[7]),
                    trial=int(cells[8]),
                    rse=float(cells[9]),
                    exact=int(cells[10]),
                    iterations=int(cells[11]),
                    reshuffles=int(cells[12]),
                    runtime_s=float(cells[13]),
                    status=cells[14],
                )
            )
    return records


def write_summary_csv(path, rows) -> None:
    cols = (
        "solver",
        "m",
        "k",
        "snr_db",
        "count",
        "mean_rse",
        "std_rse",
        "exact_rate",
        "mean_iterations",
        "std_iterations",
        "mean_runtime_s",
    )
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        r.solver,
                        str(r.m),
                        str(r.k),
                        csvio.format_float(r.snr_db),
                        str(r.count),
                        csvio.format_float(r.mean_rse),
                        csvio.format_float(r.std_rse),
                        csvio.format_float(r.exact_rate),
                        csvio.format_float(r.mean_iterations),
                        csvio.format_float(r.std_iterations),
                        csvio.format_float(r.mean_runtime_s),
                    ]
                )
                + "\n"
            )
