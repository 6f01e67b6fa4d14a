"""ADMM solver for chain-coupled estimation problems.

Minimizes a sum of per-block costs plus costs on consecutive-block
differences by operator splitting: parallel closed-form prox updates, a
linear-time projection onto the chain constraint, and scaled dual
ascent. Ships turnkey piecewise-constant mean filtering and variance
filtering on top of the generic engine.
"""

from .admm import (
    ChainProblem,
    SolverConfig,
    SolverReport,
    SolverState,
    residuals,
    solve,
)
from .exceptions import (
    NotPositiveDefiniteError,
    NumericalFailureError,
    UnboundedProblemError,
)
from .filters import (
    MeanFilterSpec,
    Penalty,
    Segment,
    VarianceEstimate,
    VarianceFilterSpec,
    lambda_max_mean,
    mean_filter,
    segments,
    variance_filter,
)
from .linalg import EigenDecomposition, spd_factor, spd_solve, sym_eig
from .projection import ChainCholesky, chain_factor, project
from .prox import (
    GaussianProxCache,
    gaussian_prox_cache,
    prox_gaussian,
    prox_neg_logdet,
    soft_threshold_group,
    soft_threshold_scalar,
)

__version__ = "0.1.0"

__all__ = [
    "ChainCholesky",
    "ChainProblem",
    "EigenDecomposition",
    "GaussianProxCache",
    "MeanFilterSpec",
    "NotPositiveDefiniteError",
    "NumericalFailureError",
    "Penalty",
    "Segment",
    "SolverConfig",
    "SolverReport",
    "SolverState",
    "UnboundedProblemError",
    "VarianceEstimate",
    "VarianceFilterSpec",
    "chain_factor",
    "gaussian_prox_cache",
    "lambda_max_mean",
    "mean_filter",
    "project",
    "prox_gaussian",
    "prox_neg_logdet",
    "residuals",
    "segments",
    "soft_threshold_group",
    "soft_threshold_scalar",
    "solve",
    "spd_factor",
    "spd_solve",
    "sym_eig",
    "variance_filter",
    "__version__",
]
