"""Piecewise-constant mean and variance estimation via the chain solver.

The mean filter fits one Gaussian mean per time step under a total
variation penalty on consecutive differences, producing piecewise
constant estimates and hence a segmentation of the series. The variance
filter does the same for a zero-mean process, estimating one inverse
covariance per step with a penalty on consecutive inverse-covariance
differences.
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from . import linalg, prox
from .admm import ChainProblem, SolverConfig, solve
from .exceptions import NotPositiveDefiniteError, NumericalFailureError, \
    UnboundedProblemError


class Penalty(str, Enum):
    """Shape of the coupling penalty on consecutive differences.

    GROUP penalizes the l2 norm of each whole difference block (the
    Frobenius norm for matrix-valued blocks; FROBENIUS is an alias) and
    zeroes differences as a unit. ELEMENTWISE penalizes each component
    separately, allowing individual components to stay constant.
    """

    GROUP = "group"
    ELEMENTWISE = "elementwise"
    FROBENIUS = "group"


@dataclass
class MeanFilterSpec:
    """Regularization weight, penalty shape and noise covariance.

    ``sigma=None`` means identity noise covariance.
    """

    lam: float
    penalty: Penalty = Penalty.GROUP
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lambda must be nonnegative, got %g" % self.lam)
        self.penalty = Penalty(self.penalty)


@dataclass
class VarianceFilterSpec:
    """Regularization weight and penalty shape for variance filtering.

    ``window`` averages that many trailing sample outer products into
    each block's data matrix (1 keeps the plain per-sample products;
    values above 1 help when the dimension exceeds 1, since a single
    outer product is rank one). ``divergence_floor`` is the objective
    value below which the solve is declared unbounded.
    """

    lam: float
    penalty: Penalty = Penalty.GROUP
    window: int = 1
    divergence_floor: float = -1e8

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("lambda must be nonnegative, got %g" % self.lam)
        if int(self.window) < 1:
            raise ValueError("window must be >= 1, got %s" % self.window)
        self.penalty = Penalty(self.penalty)


@dataclass
class VarianceEstimate:
    """Per-step inverse covariances and their inverses (the covariances)."""

    precision: np.ndarray
    covariance: np.ndarray


class Segment(NamedTuple):
    """Maximal constant run: 1-based inclusive sample range and its level."""

    start: int
    end: int
    level: object


def _as_series(data):
    arr = np.asarray(data, dtype=float)
    was_1d = arr.ndim == 1
    if was_1d:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("expected a (N,) or (N, n) array of samples")
    if not np.isfinite(arr).all():
        raise ValueError("samples contain non-finite values")
    return arr, was_1d


def _resolve_rho(config, lam):
    if config.rho is not None:
        return float(config.rho)
    return float(lam) if lam > 0.0 else 1.0


def mean_filter(data, spec, config=None, threads=1):
    """Estimate a piecewise-constant mean sequence.

    Parameters
    ----------
    data : (N,) or (N, n) array_like
        Observed samples, one row per time step.
    spec : MeanFilterSpec
    config : SolverConfig, optional
    threads : int
        Worker threads for the per-block prox updates (1 = sequential).

    Returns
    -------
    estimates : ndarray
        Mean estimates, shaped like ``data``.
    report : SolverReport
    """
    if config is None:
        config = SolverConfig()
    samples, was_1d = _as_series(data)
    n_samples, dim = samples.shape
    sigma = np.eye(dim) if spec.sigma is None else linalg.symmetrize(spec.sigma)
    if sigma.shape[0] != dim:
        raise ValueError(
            "sigma dimension %d does not match data dimension %d"
            % (sigma.shape[0], dim)
        )
    rho = _resolve_rho(config, spec.lam)
    problem = _build_mean_problem(samples, sigma, spec.lam, spec.penalty, rho)
    report = solve(problem, config, threads=threads)
    estimates = report.x_star[:, 0] if was_1d else report.x_star
    return estimates, report


def _build_mean_problem(samples, sigma, lam, penalty, rho):
    n_samples, dim = samples.shape
    cache = prox.gaussian_prox_cache(sigma, samples, rho)
    grouped = penalty is Penalty.GROUP

    def phi(i, target, rho_k):
        if rho_k != cache.rho:
            raise ValueError("prox cache was built for rho=%g" % cache.rho)
        return prox.prox_gaussian(cache, i, target)

    def phi_batch(targets, rho_k):
        if rho_k != cache.rho:
            raise ValueError("prox cache was built for rho=%g" % cache.rho)
        return prox.prox_gaussian_batch(cache, targets)

    def psi(i, target, rho_k):
        kappa = lam / rho_k
        if grouped:
            return prox.soft_threshold_group(target, kappa)
        return prox.soft_threshold_scalar(target, kappa)

    def psi_batch(targets, rho_k):
        kappa = lam / rho_k
        if grouped:
            return prox.soft_threshold_group_rows(targets, kappa)
        return prox.soft_threshold_scalar(targets, kappa)

    sigma_inv = cache.sigma_inv

    def objective(x_blocks, r_blocks):
        resid = samples - x_blocks
        quad = 0.5 * float(np.einsum("ij,jk,ik->", resid, sigma_inv, resid))
        if r_blocks.shape[0] == 0:
            return quad
        if grouped:
            pen = float(np.sqrt((r_blocks * r_blocks).sum(axis=1)).sum())
        else:
            pen = float(np.abs(r_blocks).sum())
        return quad + lam * pen

    return ChainProblem(
        n_blocks=n_samples,
        block_dim=dim,
        phi_prox=phi,
        psi_prox=psi if n_samples > 1 else None,
        phi_prox_batch=phi_batch,
        psi_prox_batch=psi_batch,
        objective=objective,
        default_rho=rho,
    )


def _trailing_gram_average(samples, window):
    outers = np.einsum("ij,ik->ijk", samples, samples)
    if window == 1:
        return outers
    csum = np.cumsum(outers, axis=0)
    grams = np.empty_like(outers)
    n = samples.shape[0]
    for i in range(n):
        if i < window:
            grams[i] = csum[i] / (i + 1)
        else:
            grams[i] = (csum[i] - csum[i - window]) / window
    return grams


def _check_variance_bounded(grams, lam):
    # A direction of unboundedness exists exactly when the relevant data
    # matrix is singular: per block for lam = 0 (blocks decouple), or the
    # pooled matrix for lam > 0 (grow every block along a common null
    # direction at zero coupling cost).
    def is_singular(mat):
        evals = linalg.sym_eig(mat).eigenvalues
        top = float(evals[-1])
        return top <= 0.0 or float(evals[0]) <= 1e-10 * top

    if lam == 0.0:
        for i in range(grams.shape[0]):
            if is_singular(grams[i]):
                raise UnboundedProblemError(
                    "data matrix at sample %d is singular, so its block "
                    "subproblem is unbounded below with lambda = 0; "
                    "increase lambda or use a window > 1" % i
                )
    else:
        if is_singular(grams.mean(axis=0)):
            raise UnboundedProblemError(
                "pooled data matrix is singular, so the objective is "
                "unbounded below for every lambda; use a window > 1 or "
                "more samples"
            )


def variance_filter(data, spec, config=None, threads=1):
    """Estimate a piecewise-constant covariance sequence.

    Works in the inverse-covariance parametrization (one SPD matrix per
    step) and reports both the precision and covariance sequences.

    Returns
    -------
    estimate : VarianceEstimate
    report : SolverReport
    """
    if config is None:
        config = SolverConfig()
    samples, _ = _as_series(data)
    n_samples, dim = samples.shape
    rho = _resolve_rho(config, spec.lam)
    grams = _trailing_gram_average(samples, int(spec.window))
    _check_variance_bounded(grams, spec.lam)
    problem = _build_variance_problem(grams, spec, rho)
    report = solve(problem, config, threads=threads)

    precision = np.empty((n_samples, dim, dim))
    covariance = np.empty_like(precision)
    eye = np.eye(dim)
    for i in range(n_samples):
        mat = report.x_star[i].reshape(dim, dim)
        mat = 0.5 * (mat + mat.T)
        try:
            factor = linalg.spd_factor(mat)
        except NotPositiveDefiniteError as exc:
            raise NumericalFailureError(
                "inverse-covariance estimate at block %d is not positive "
                "definite (pivot %d); tighten tolerances" % (i, exc.pivot_index),
                block_index=i,
            ) from exc
        precision[i] = mat
        inv = linalg.spd_solve(factor, eye)
        covariance[i] = 0.5 * (inv + inv.T)
    return VarianceEstimate(precision=precision, covariance=covariance), report


def _build_variance_problem(grams, spec, rho):
    n_samples, dim = grams.shape[0], grams.shape[1]
    flat_dim = dim * dim
    lam = spec.lam
    grouped = spec.penalty is Penalty.GROUP
    scalar_gram = grams[:, 0, 0] if dim == 1 else None

    def phi(i, target, rho_k):
        x = prox.prox_neg_logdet_gram(target.reshape(dim, dim), grams[i], rho_k)
        return x.reshape(flat_dim)

    def phi_batch(targets, rho_k):
        if dim == 1:
            lam_e = rho_k * targets[:, 0] - scalar_gram
            return prox._mu_from_eigenvalues(lam_e, rho_k)[:, None]
        out = np.empty_like(targets)
        for i in range(n_samples):
            out[i] = prox.prox_neg_logdet_gram(
                targets[i].reshape(dim, dim), grams[i], rho_k
            ).reshape(flat_dim)
        return out

    def psi(i, target, rho_k):
        kappa = lam / rho_k
        if grouped:
            return prox.soft_threshold_group(target, kappa)
        return prox.soft_threshold_scalar(target, kappa)

    def psi_batch(targets, rho_k):
        kappa = lam / rho_k
        if grouped:
            return prox.soft_threshold_group_rows(targets, kappa)
        return prox.soft_threshold_scalar(targets, kappa)

    def objective(x_blocks, r_blocks):
        if dim == 1:
            x = x_blocks[:, 0]
            if (x <= 0.0).any():
                return np.inf
            quad = float((x * scalar_gram).sum())
            logdet = float(np.log(x).sum())
        else:
            quad = 0.0
            logdet = 0.0
            for i in range(n_samples):
                mat = x_blocks[i].reshape(dim, dim)
                try:
                    factor = linalg.spd_factor(0.5 * (mat + mat.T))
                except (NotPositiveDefiniteError, ValueError):
                    return np.inf
                quad += float((mat * grams[i]).sum())
                logdet += linalg.spd_logdet(factor)
        if r_blocks.shape[0] == 0:
            pen = 0.0
        elif grouped:
            pen = float(np.sqrt((r_blocks * r_blocks).sum(axis=1)).sum())
        else:
            pen = float(np.abs(r_blocks).sum())
        return quad - logdet + lam * pen

    return ChainProblem(
        n_blocks=n_samples,
        block_dim=flat_dim,
        phi_prox=phi,
        psi_prox=psi if n_samples > 1 else None,
        phi_prox_batch=phi_batch,
        psi_prox_batch=psi_batch,
        objective=objective,
        divergence_floor=spec.divergence_floor,
        default_rho=rho,
    )


def lambda_max_mean(data, sigma=None, penalty=Penalty.GROUP):
    """Smallest penalty weight at which the mean filter output is constant.

    From the optimality conditions of the constant solution: with
    weighted residual partial sums P_k = sum_{j<=k} sigma^{-1} (y_j - mean),
    the constant solution is optimal exactly when every ||P_k|| is at
    most lambda, in the norm dual to the penalty (l2 for GROUP, max-abs
    for ELEMENTWISE).
    """
    penalty = Penalty(penalty)
    samples, _ = _as_series(data)
    n_samples, dim = samples.shape
    if n_samples < 2:
        raise ValueError("lambda_max needs at least 2 samples")
    sigma = np.eye(dim) if sigma is None else linalg.symmetrize(sigma)
    if sigma.shape[0] != dim:
        raise ValueError(
            "sigma dimension %d does not match data dimension %d"
            % (sigma.shape[0], dim)
        )
    sigma_inv = linalg.spd_inverse(sigma)
    centered = samples - samples.mean(axis=0)
    partial = np.cumsum(centered, axis=0)[:-1] @ sigma_inv
    if penalty is Penalty.GROUP:
        norms = np.sqrt((partial * partial).sum(axis=1))
    else:
        norms = np.abs(partial).max(axis=1)
    return float(norms.max())


def segments(estimates, tol=None):
    """Split a piecewise-constant estimate into maximal constant runs.

    Consecutive blocks whose difference stays within ``tol`` in max-abs
    norm belong to the same run. ``tol`` defaults to 1e-3 times the
    overall value spread plus a small absolute floor, absorbing solver
    ripple. Returns a list of :class:`Segment` with 1-based inclusive
    sample ranges; levels are per-segment means (scalars for
    one-dimensional blocks).

    Segments partition 1..N.
    """
    est, was_1d = _as_series(estimates)
    n_samples = est.shape[0]
    if tol is None:
        spread = float(est.max() - est.min())
        tol = 1e-3 * spread + 1e-9 * (1.0 + float(np.abs(est).max()))
    if not tol > 0.0:
        raise ValueError("tol must be positive, got %g" % tol)

    out = []
    start = 0
    for i in range(1, n_samples + 1):
        boundary = i == n_samples or np.abs(est[i] - est[i - 1]).max() > tol
        if boundary:
            level = est[start:i].mean(axis=0)
            out.append(
                Segment(start + 1, i, float(level[0]) if was_1d or est.shape[1] == 1
                        else level)
            )
            start = i
    return out
