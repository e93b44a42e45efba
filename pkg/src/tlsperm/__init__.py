"""Total-least-squares recovery of a lost row correspondence.

Observed are two noisy views of one hidden design: y1 = x + e1 and
y2 = P x r + e2, where r mixes columns and P permutes rows. The package
estimates the permutation by minimizing the rank-p residual of the stacked
pair, exactly for small n and by alternating fit/assignment steps otherwise,
and ships the evaluation metrics, the high-probability loss bound, and a
deterministic Monte Carlo harness around them.
"""
from .errors import ContractViolation, DegenerateFit, NumericalFailure, RankDeficient
from .estimators import (
    COST_KINDS,
    EstimateResult,
    alta,
    aloa,
    brute_force_tls,
    build_cost,
)
from .evaluation import (
    BoundValue,
    eig_tail_rhs,
    hamming_distance,
    procrustes_loss,
    procrustes_residual_gap,
    quadratic_loss,
    recovery_bound,
    trace_max_check,
)
from .lap import solve_lap
from .linalg import (
    SvdResult,
    condition_number,
    frobenius_norm,
    nuclear_norm,
    orthogonal_procrustes,
    singular_values,
    svd,
    sym_eigvals,
)
from .model import (
    Observations,
    ProblemInstance,
    apply_permutation,
    as_covariance,
    as_permutation,
    generate_design,
    generate_observations,
    identity_permutation,
    invert_permutation,
    normalize_condition,
    partial_shuffle,
    random_orthogonal,
    random_permutation,
    rotation_2d,
    sample_noise,
    snr,
    stream,
)
from .tls import TlsFit, tls_fit, tls_objective

__version__ = "0.1.0"

__all__ = [
    "BoundValue",
    "COST_KINDS",
    "ContractViolation",
    "DegenerateFit",
    "EstimateResult",
    "NumericalFailure",
    "Observations",
    "ProblemInstance",
    "RankDeficient",
    "SvdResult",
    "TlsFit",
    "alta",
    "aloa",
    "apply_permutation",
    "as_covariance",
    "as_permutation",
    "brute_force_tls",
    "build_cost",
    "condition_number",
    "eig_tail_rhs",
    "frobenius_norm",
    "generate_design",
    "generate_observations",
    "hamming_distance",
    "identity_permutation",
    "invert_permutation",
    "normalize_condition",
    "nuclear_norm",
    "orthogonal_procrustes",
    "partial_shuffle",
    "procrustes_loss",
    "procrustes_residual_gap",
    "quadratic_loss",
    "random_orthogonal",
    "random_permutation",
    "recovery_bound",
    "rotation_2d",
    "sample_noise",
    "singular_values",
    "snr",
    "solve_lap",
    "stream",
    "svd",
    "sym_eigvals",
    "tls_fit",
    "tls_objective",
    "trace_max_check",
    "__version__",
]
