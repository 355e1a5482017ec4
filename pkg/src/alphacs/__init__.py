"""Finite-alphabet sparse signal recovery toolkit.

Recovers k-sparse vectors whose nonzero entries come from a known symmetric
lattice d*{0, +-1, ..., +-q}, from m < n linear measurements, by minimizing a
least-squares term plus a concave lattice-aware penalty with an ADMM-style
splitting solver. Includes convex baselines, eigenvalue recoverability
certificates, an exactness test for noise-free data, a seeded benchmark
harness, and an RSS grid-localization experiment.
"""

from .baselines import BaselineConfig, solve_bp_admm, solve_lasso_admm
from .bench import (
    ExperimentSpec,
    SummaryRow,
    TrialRecord,
    aggregate,
    exact_recovery,
    read_records_csv,
    rse,
    run_sweep,
    write_records_csv,
)
from .certify import (
    CertificateReport,
    brute_force_minimizer,
    certificate_generic,
    certificate_ternary,
    certify_all_supports,
    kernel_general_position_check,
)
from .exceptions import BudgetExceededError, NumericalFailureError
from .localize import (
    Grid,
    RssParams,
    SensorLayout,
    build_dictionary,
    localization_error,
    localize_targets,
    orthogonalize,
    path_loss_db,
    rss_model,
    run_localization_sweep,
)
from .model import (
    Alphabet,
    Problem,
    SparseSignal,
    add_measurement_noise,
    gen_gaussian_matrix,
    gen_signal,
    make_problem,
)
from .penalty import ObjectiveParams, beta_weight, beta_weights, concave_G, mcp_g, objective_F, objective_H
from .solver import (
    RecoveryResult,
    SolverConfig,
    SolverState,
    convergence_conditions,
    exactness_distance,
    solve_madmm,
    solve_madmm_r,
    soft_threshold,
    project_box,
    stationarity_residual,
    threshold_weights,
)

__version__ = "0.1.0"
