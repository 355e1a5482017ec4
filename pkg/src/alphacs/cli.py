"""Command-line front-end: recover, bench, certify, and localize subcommands.

Every stochastic behavior is pinned by --seed; the fully resolved
configuration is logged to stderr before the run. A flat key=value config
file can supply defaults, with explicit flags taking precedence.

Exit codes: 0 success, 2 input error, 3 refused enumeration budget,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import bench, certify, csvio, localize
from .baselines import BaselineConfig, solve_bp_admm, solve_lasso_admm
from .exceptions import BudgetExceededError, NumericalFailureError
from .model import Alphabet, Problem
from .solver import SolverConfig, solve_madmm, solve_madmm_r

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Accept '20,25,30' or an inclusive range '20:60:5' (step optional)."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ValueError(f"bad range {text!r}; use start:stop[:step]")
        if step <= 0:
            raise ValueError("range step must be positive")
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(","))


def _parse_solvers(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_snr(text: str) -> float:
    if text.lower() in ("inf", "none", "nonoise", "no-noise"):
        return math.inf
    return float(text)


def read_config_file(path) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; keys use flag spelling."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


# flag name -> converter, shared across subcommands
_CONVERTERS = {
    "lam": float,
    "alpha": float,
    "d": float,
    "q": int,
    "n": int,
    "k": _parse_int_list,
    "m": _parse_int_list,
    "snr_db": _parse_snr,
    "trials": int,
    "seed": int,
    "tol": float,
    "exact_tol": float,
    "max_iters": int,
    "max_reshuffles": int,
    "solver": _parse_solvers,
    "out": str,
    "workers": int,
    "max_supports": int,
    "train_snr_db": _parse_snr,
}


def _add_common(parser: argparse.ArgumentParser, names) -> None:
    helps = {
        "lam": "regularization weight",
        "alpha": "augmented-Lagrangian penalty",
        "d": "alphabet symbol spacing",
        "q": "alphabet max level",
        "n": "signal length",
        "k": "sparsity (or comma/colon list for sweeps)",
        "m": "measurement count (or comma/colon list for sweeps)",
        "snr_db": "measurement SNR in dB ('inf' for noise-free)",
        "trials": "trials per grid point",
        "seed": "master seed",
        "tol": "successive-iterate stopping tolerance",
        "exact_tol": "relative square distance to the lattice counted as exact",
        "max_iters": "iteration cap per solve",
        "max_reshuffles": "restart budget for the reshuffling solver",
        "solver": "solver name or comma list (madmm, madmm_r, lasso, bp)",
        "out": "output file path",
        "workers": "parallel trial workers",
        "max_supports": "support enumeration budget",
        "train_snr_db": "dictionary training SNR in dB",
    }
    for name in names:
        flag = "--" + name.replace("_", "-")
        if name == "lam":
            flag = "--lambda"
        parser.add_argument(flag, dest=name, type=str, default=None, help=helps[name])
    parser.add_argument("--config", type=str, default=None, help="key=value defaults file")


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags; values converted per flag."""
    resolved = dict(defaults)
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        for key, raw in file_values.items():
            if key in _CONVERTERS and key in defaults:
                resolved[key] = _CONVERTERS[key](raw)
    for key in defaults:
        raw = getattr(args, key, None)
        if raw is not None:
            resolved[key] = _CONVERTERS[key](raw)
    return resolved


def _log_config(command: str, resolved: dict) -> None:
    pairs = " ".join(f"{k}={v}" for k, v in sorted(resolved.items()))
    print(f"[alphacs {command}] config: {pairs}", file=sys.stderr)


def _cmd_recover(args) -> int:
    defaults = {
        "lam": 1e-2,
        "alpha": 1.0,
        "d": 1.0,
        "q": 1,
        "tol": 1e-12,
        "exact_tol": 1e-4,
        "max_iters": 5000,
        "max_reshuffles": 50,
        "seed": 0,
        "solver": ("madmm",),
        "out": "estimate.csv",
    }
    cfg = _resolve(args, defaults)
    _log_config("recover", cfg)
    solver = cfg["solver"][0] if isinstance(cfg["solver"], tuple) else cfg["solver"]
    A = csvio.read_matrix(args.matrix)
    y = csvio.read_vector(args.y)
    if y.size != A.shape[0]:
        raise ValueError(
            f"{args.y}: measurement length {y.size} does not match matrix rows {A.shape[0]}"
        )
    problem = Problem(A=A, y=y)
    alphabet = Alphabet(d=cfg["d"], q=cfg["q"])
    if solver in ("madmm", "madmm_r"):
        config = SolverConfig(
            lam=cfg["lam"],
            alpha=cfg["alpha"],
            max_iters=cfg["max_iters"],
            iterate_tol=cfg["tol"],
            exact_tol=cfg["exact_tol"],
            max_reshuffles=cfg["max_reshuffles"],
            seed=cfg["seed"],
        )
        fn = solve_madmm if solver == "madmm" else solve_madmm_r
        result = fn(problem, alphabet, config)
    elif solver in ("lasso", "bp"):
        config = BaselineConfig(
            lam=cfg["lam"],
            alpha=cfg["alpha"],
            max_iters=cfg["max_iters"],
            iterate_tol=cfg["tol"],
            quantize_output=True,
        )
        fn = solve_lasso_admm if solver == "lasso" else solve_bp_admm
        result = fn(problem, config, alphabet)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    csvio.write_vector(cfg["out"], result.estimate)
    resid = result.stationarity_residual
    print(
        f"solver={solver} iterations={result.iterations} reshuffles={result.reshuffles} "
        f"converged={str(result.converged).lower()} exact={str(result.exact).lower()} "
        f"stationarity_residual={'-' if resid is None else csvio.format_float(resid)} "
        f"objective={csvio.format_float(result.objective)} out={cfg['out']}"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    defaults = {
        "n": 100,
        "k": (10,),
        "m": (40,),
        "d": 1.0,
        "q": 1,
        "snr_db": math.inf,
        "trials": 100,
        "seed": 0,
        "lam": 1e-2,
        "alpha": 1.0,
        "tol": 1e-12,
        "exact_tol": 1e-4,
        "max_iters": 5000,
        "max_reshuffles": 50,
        "solver": ("madmm", "lasso"),
        "out": "bench.csv",
        "workers": 1,
    }
    cfg = _resolve(args, defaults)
    _log_config("bench", cfg)
    snr = None if math.isinf(cfg["snr_db"]) else cfg["snr_db"]
    spec = bench.ExperimentSpec(
        n=cfg["n"],
        k_values=cfg["k"],
        m_values=cfg["m"],
        alphabet=Alphabet(d=cfg["d"], q=cfg["q"]),
        solvers=cfg["solver"],
        trials=cfg["trials"],
        seed=cfg["seed"],
        snr_db=snr,
        lam=cfg["lam"],
        alpha=cfg["alpha"],
        iterate_tol=cfg["tol"],
        exact_tol=cfg["exact_tol"],
        max_iters=cfg["max_iters"],
        max_reshuffles=cfg["max_reshuffles"],
    )
    records = bench.run_sweep(spec, workers=cfg["workers"], measure_runtime=not args.no_timing)
    bench.write_records_csv(cfg["out"], records)
    for row in bench.aggregate(records):
        print(
            f"solver={row.solver} m={row.m} k={row.k} snr_db={csvio.format_float(row.snr_db)} "
            f"trials={row.count} exact_rate={row.exact_rate:.3f} mean_rse={row.mean_rse:.6g} "
            f"mean_iterations={row.mean_iterations:.1f}"
        )
    print(f"wrote {len(records)} records to {cfg['out']}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    defaults = {
        "lam": 1e-2,
        "d": 1.0,
        "q": 1,
        "k": (2,),
        "max_supports": 1_000_000,
        "out": "certify.csv",
    }
    cfg = _resolve(args, defaults)
    _log_config("certify", cfg)
    A = csvio.read_matrix(args.matrix)
    k = cfg["k"][0] if isinstance(cfg["k"], tuple) else int(cfg["k"])
    alphabet = Alphabet(d=cfg["d"], q=cfg["q"])
    report = certify.certify_all_supports(
        A, cfg["lam"], alphabet, k, max_supports=cfg["max_supports"]
    )
    with open(cfg["out"], "w") as fh:
        fh.write("support,min_eig,pass\n")
        for entry in report.entries:
            joined = ";".join(str(i) for i in entry.support)
            fh.write(
                f"{joined},{csvio.format_float(entry.min_eig)},"
                f"{int(entry.min_eig > certify.EIG_POS_TOL)}\n"
            )
    worst = ";".join(str(i) for i in report.worst_support)
    print(
        f"supports={len(report.entries)} worst_support={worst or '-'} "
        f"worst_min_eig={csvio.format_float(report.worst_min_eig)} "
        f"pass={str(report.passed).lower()} out={cfg['out']}"
    )
    return EXIT_OK


def _cmd_localize(args) -> int:
    defaults = {
        "m": (40,),
        "k": (4,),
        "trials": 10,
        "seed": 0,
        "lam": 1e-3,
        "alpha": 1.0,
        "tol": 1e-8,
        "max_iters": 5000,
        "train_snr_db": 25.0,
        "solver": ("madmm", "lasso"),
        "out": "localize.csv",
        "workers": 1,
    }
    cfg = _resolve(args, defaults)
    _log_config("localize", cfg)
    k = cfg["k"][0] if isinstance(cfg["k"], tuple) else int(cfg["k"])
    train = None if math.isinf(cfg["train_snr_db"]) else cfg["train_snr_db"]
    records = localize.run_localization_sweep(
        cfg["m"],
        cfg["trials"],
        cfg["seed"],
        solvers=cfg["solver"],
        workers=cfg["workers"],
        k=k,
        lam=cfg["lam"],
        alpha=cfg["alpha"],
        iterate_tol=cfg["tol"],
        max_iters=cfg["max_iters"],
        train_snr_db=train,
    )
    localize.write_localization_csv(cfg["out"], records)
    by = {}
    for r in records:
        by.setdefault((r.solver, r.m), []).append(r)
    for (solver, m), recs in sorted(by.items()):
        err = float(np.mean([r.loc_error_m for r in recs]))
        iters = float(np.mean([r.iterations for r in recs]))
        print(f"solver={solver} m={m} mean_loc_error_m={err:.4f} mean_iterations={iters:.1f}")
    print(f"wrote {len(records)} records to {cfg['out']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphacs",
        description="Finite-alphabet sparse recovery: solvers, certificates, benchmarks, localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="recover a signal from matrix and measurement files")
    p.add_argument("matrix", help="sensing matrix CSV (row-major, no header)")
    p.add_argument("y", help="measurement vector CSV (single row)")
    _add_common(
        p,
        ["lam", "alpha", "d", "q", "tol", "exact_tol", "max_iters", "max_reshuffles", "seed", "solver", "out"],
    )
    p.set_defaults(fn=_cmd_recover)

    p = sub.add_parser("bench", help="run a seeded benchmark sweep and write a records CSV")
    _add_common(
        p,
        [
            "n", "k", "m", "d", "q", "snr_db", "trials", "seed", "lam", "alpha",
            "tol", "exact_tol", "max_iters", "max_reshuffles", "solver", "out", "workers",
        ],
    )
    p.add_argument(
        "--no-timing",
        action="store_true",
        help="write zeros in runtime_s so repeated runs are byte-identical",
    )
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("certify", help="eigenvalue recoverability certificate over all supports")
    p.add_argument("matrix", help="sensing matrix CSV")
    _add_common(p, ["lam", "d", "q", "k", "max_supports", "out"])
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("localize", help="grid localization experiment")
    _add_common(
        p,
        ["m", "k", "trials", "seed", "lam", "alpha", "tol", "max_iters", "train_snr_db", "solver", "out", "workers"],
    )
    p.set_defaults(fn=_cmd_localize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericalFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())
