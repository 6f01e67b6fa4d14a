"""ADMM engine for chain-coupled objectives.

Solves

    minimize  sum_i Phi_i(x_i) + sum_i Psi_i(r_i)
    subject to  r_i = x_{i+1} - x_i,

by alternating the 2N-1 independent prox updates of Phi and Psi, a
single projection onto the chain subspace, and the scaled dual updates,
with optional over-relaxation. Termination follows the standard
absolute-plus-relative test on the primal and dual residual norms.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Callable, Optional

import numpy as np

from .exceptions import NumericalFailureError, UnboundedProblemError
from .projection import chain_factor, project

HISTORY_DTYPE = np.dtype(
    [
        ("iter", np.int64),
        ("primal", np.float64),
        ("dual", np.float64),
        ("eps_pri", np.float64),
        ("eps_dual", np.float64),
    ]
)


@dataclass
class SolverConfig:
    """Penalty, relaxation, tolerances and the iteration cap.

    ``rho=None`` defers to the problem's preferred penalty (the filters
    use their regularization weight when it is positive, else 1).
    """

    rho: Optional[float] = None
    alpha: float = 1.8
    eps_abs: float = 1e-4
    eps_rel: float = 1e-3
    max_iter: int = 10000

    def __post_init__(self):
        if self.rho is not None and not self.rho > 0.0:
            raise ValueError("rho must be positive, got %g" % self.rho)
        if not 1.0 <= self.alpha < 2.0:
            raise ValueError("alpha must lie in [1, 2), got %g" % self.alpha)
        if not self.eps_abs > 0.0:
            raise ValueError("eps_abs must be positive")
        if not self.eps_rel > 0.0:
            raise ValueError("eps_rel must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class ChainProblem:
    """A chain-coupled problem instance given through its prox maps.

    ``phi_prox(i, target, rho)`` returns the minimizer of
    Phi_i(x) + (rho/2)||x - target||^2 for block i in 0..n_blocks-1;
    ``psi_prox(i, target, rho)`` the analogue for the difference costs,
    i in 0..n_blocks-2. Both must return length-``block_dim`` vectors.

    Optional pieces: vectorized prox maps over all blocks at once (used
    by the sequential engine when present; must match the per-block maps
    exactly), an objective callback ``objective(x_blocks, r_blocks)``
    used for the report's objective trace, and ``divergence_floor``
    below which the objective trace triggers an unbounded-problem error.
    """

    n_blocks: int
    block_dim: int
    phi_prox: Callable[[int, np.ndarray, float], np.ndarray]
    psi_prox: Optional[Callable[[int, np.ndarray, float], np.ndarray]] = None
    phi_prox_batch: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    psi_prox_batch: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    objective: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    divergence_floor: Optional[float] = None
    default_rho: float = 1.0

    def __post_init__(self):
        if int(self.n_blocks) < 1:
            raise ValueError("n_blocks must be >= 1")
        if int(self.block_dim) < 1:
            raise ValueError("block_dim must be >= 1")
        if self.n_blocks > 1 and self.psi_prox is None:
            raise ValueError("psi_prox is required when n_blocks > 1")


@dataclass
class SolverState:
    """Consensus and dual iterates; pass back to ``solve`` to warm start."""

    z: np.ndarray
    s: Optional[np.ndarray]
    u: np.ndarray
    t: Optional[np.ndarray]


@dataclass
class SolverReport:
    """Outcome of a solve: solution, convergence flag and residual history."""

    x_star: np.ndarray
    r_star: Optional[np.ndarray]
    iterations: int
    converged: bool
    history: np.ndarray
    objective_trace: Optional[np.ndarray] = None
    state: Optional[SolverState] = field(default=None, repr=False)


@lru_cache(maxsize=64)
def _cached_chain_factor(n_blocks):
    return chain_factor(n_blocks)


def _stacked_norm(a, b):
    total = float((a * a).sum())
    if b is not None:
        total += float((b * b).sum())
    return math.sqrt(total)


def residuals(x, r, z, s, z_prev, s_prev, u, t, rho, eps_abs, eps_rel):
    """Residual norms and tolerances for the stacked iterate at one step.

    Returns ``(primal, dual, eps_pri, eps_dual)`` where primal is
    ||(x - z, r - s)||_2, dual is rho * ||(z, s) - (z_prev, s_prev)||_2,
    and the tolerances use the square root of the full stacked dimension
    (2N - 1) * d.
    """
    dim = x.size + (r.size if r is not None else 0)
    root_dim = math.sqrt(dim)
    primal = _stacked_norm(x - z, None if r is None else r - s)
    dual = rho * _stacked_norm(z - z_prev, None if s is None else s - s_prev)
    eps_pri = root_dim * eps_abs + eps_rel * max(
        _stacked_norm(x, r), _stacked_norm(z, s)
    )
    eps_dual = root_dim * eps_abs + eps_rel * rho * _stacked_norm(u, t)
    return primal, dual, eps_pri, eps_dual


def _eval_prox_family(prox, targets, rho, pool):
    out = np.empty_like(targets)
    if pool is None:
        for i in range(targets.shape[0]):
            out[i] = prox(i, targets[i], rho)
    else:
        def run(i):
            out[i] = prox(i, targets[i], rho)

        list(pool.map(run, range(targets.shape[0])))
    return out


def _check_finite(blocks, iteration, which):
    if np.isfinite(blocks).all():
        return
    bad = int(np.argwhere(~np.isfinite(blocks).all(axis=1))[0, 0])
    raise NumericalFailureError(
        "%s prox returned non-finite values at iteration %d, block %d"
        % (which, iteration, bad),
        iteration=iteration,
        block_index=bad,
    )


def solve(problem, config=None, initial=None, threads=1, callback=None):
    """Run the splitting iteration on ``problem``.

    Parameters
    ----------
    problem : ChainProblem
    config : SolverConfig, optional
        Defaults to ``SolverConfig()``.
    initial : SolverState, optional
        Warm start; all-zero state otherwise.
    threads : int
        Number of worker threads for the per-block prox evaluations.
        1 (the default) is the sequential reference mode and the only
        mode with a determinism guarantee.
    callback : callable, optional
        ``callback(k, info)`` invoked after each iteration with a dict
        holding the current ``x, r, z, s, u, t`` arrays (read-only use).

    Returns
    -------
    SolverReport
        The solution is reported from the projected (feasible) side, so
        ``r_star`` equals the exact consecutive differences of ``x_star``.
    """
    if config is None:
        config = SolverConfig()
    rho = config.rho if config.rho is not None else problem.default_rho
    if not rho > 0.0:
        raise ValueError("resolved rho must be positive, got %g" % rho)
    if problem.n_blocks == 1:
        return _solve_single_block(problem, config, rho, initial, callback)
    return _solve_chain(problem, config, rho, initial, int(threads), callback)


def _solve_chain(problem, config, rho, initial, threads, callback):
    n, d = problem.n_blocks, problem.block_dim
    chol = _cached_chain_factor(n)
    alpha = config.alpha

    if initial is not None:
        z = np.array(initial.z, dtype=float).reshape(n, d)
        s = np.array(initial.s, dtype=float).reshape(n - 1, d)
        u = np.array(initial.u, dtype=float).reshape(n, d)
        t = np.array(initial.t, dtype=float).reshape(n - 1, d)
    else:
        z = np.zeros((n, d))
        s = np.zeros((n - 1, d))
        u = np.zeros((n, d))
        t = np.zeros((n - 1, d))

    use_batch = threads == 1
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    history = []
    obj_trace = [] if problem.objective is not None else None
    converged = False
    iterations = 0

    try:
        for k in range(1, int(config.max_iter) + 1):
            if use_batch and problem.phi_prox_batch is not None:
                x = problem.phi_prox_batch(z - u, rho)
            else:
                x = _eval_prox_family(problem.phi_prox, z - u, rho, pool)
            if use_batch and problem.psi_prox_batch is not None:
                r = problem.psi_prox_batch(s - t, rho)
            else:
                r = _eval_prox_family(problem.psi_prox, s - t, rho, pool)
            x = np.asarray(x, dtype=float).reshape(n, d)
            r = np.asarray(r, dtype=float).reshape(n - 1, d)
            _check_finite(x, k, "block")
            _check_finite(r, k, "difference")

            # Over-relaxation blends the fresh iterate with the previous
            # consensus before the projection and dual steps.
            x_relaxed = alpha * x + (1.0 - alpha) * z
            r_relaxed = alpha * r + (1.0 - alpha) * s
            z_prev, s_prev = z, s
            z, s = project(chol, x_relaxed + u, r_relaxed + t)
            u = u + x_relaxed - z
            t = t + r_relaxed - s

            primal, dual, eps_pri, eps_dual = residuals(
                x, r, z, s, z_prev, s_prev, u, t, rho, config.eps_abs, config.eps_rel
            )
            history.append((k, primal, dual, eps_pri, eps_dual))
            iterations = k

            if obj_trace is not None:
                value = float(problem.objective(z, s))
                obj_trace.append(value)
                floor = problem.divergence_floor
                if floor is not None and value < floor:
                    raise UnboundedProblemError(
                        "objective fell below %g at iteration %d; the problem "
                        "appears unbounded" % (floor, k)
                    )
            if callback is not None:
                callback(k, {"x": x, "r": r, "z": z, "s": s, "u": u, "t": t})

            if primal <= eps_pri and dual <= eps_dual:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    return SolverReport(
        x_star=z.copy(),
        r_star=s.copy(),
        iterations=iterations,
        converged=converged,
        history=np.array(history, dtype=HISTORY_DTYPE),
        objective_trace=None if obj_trace is None else np.asarray(obj_trace),
        state=SolverState(z=z, s=s, u=u, t=t),
    )


def _solve_single_block(problem, config, rho, initial, callback):
    # With one block there are no difference terms; iterate the prox map
    # to its fixed point, which is the unconstrained minimizer of Phi_1.
    d = problem.block_dim
    if initial is not None:
        x = np.array(initial.z, dtype=float).reshape(d)
    else:
        x = np.zeros(d)
    root_dim = math.sqrt(d)
    history = []
    obj_trace = [] if problem.objective is not None else None
    converged = False
    iterations = 0
    empty_r = np.zeros((0, d))

    for k in range(1, int(config.max_iter) + 1):
        x_new = np.asarray(problem.phi_prox(0, x, rho), dtype=float).reshape(d)
        _check_finite(x_new[None, :], k, "block")
        step = float(np.linalg.norm(x_new - x))
        eps_pri = config.eps_abs * root_dim + config.eps_rel * max(
            float(np.linalg.norm(x_new)), float(np.linalg.norm(x))
        )
        eps_dual = config.eps_abs * root_dim
        primal, dual = step, rho * step
        history.append((k, primal, dual, eps_pri, eps_dual))
        x = x_new
        iterations = k

        if obj_trace is not None:
            value = float(problem.objective(x[None, :], empty_r))
            obj_trace.append(value)
            floor = problem.divergence_floor
            if floor is not None and value < floor:
                raise UnboundedProblemError(
                    "objective fell below %g at iteration %d; the problem "
                    "appears unbounded" % (floor, k)
                )
        if callback is not None:
            callback(k, {"x": x[None, :], "r": empty_r, "z": x[None, :],
                         "s": empty_r, "u": np.zeros((1, d)), "t": empty_r})
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break

    return SolverReport(
        x_star=x[None, :].copy(),
        r_star=empty_r,
        iterations=iterations,
        converged=converged,
        history=np.array(history, dtype=HISTORY_DTYPE),
        objective_trace=None if obj_trace is None else np.asarray(obj_trace),
        state=SolverState(z=x[None, :].copy(), s=None, u=np.zeros((1, d)), t=None),
    )
