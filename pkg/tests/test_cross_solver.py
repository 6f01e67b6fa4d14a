"""Cross-checks against a generic convex solver (skipped without cvxpy)."""

import numpy as np
import pytest

cp = pytest.importorskip("cvxpy")

from tvadmm import MeanFilterSpec, SolverConfig, VarianceFilterSpec, \
    mean_filter, variance_filter

TIGHT = dict(eps_abs=1e-10, eps_rel=1e-10, max_iter=300000)


def test_mean_filter_matches_cvxpy():
    rng = np.random.default_rng(18)
    y = np.repeat(rng.uniform(-3, 3, 4), 8) + rng.normal(size=32)
    lam = 2.0
    x = cp.Variable(32)
    prob = cp.Problem(
        cp.Minimize(0.5 * cp.sum_squares(y - x) + lam * cp.norm1(cp.diff(x)))
    )
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
               tol_feas=1e-12)

    est, report = mean_filter(
        y, MeanFilterSpec(lam=lam, penalty="elementwise"),
        SolverConfig(rho=lam, **TIGHT),
    )
    assert report.converged
    assert np.abs(est - x.value).max() < 1e-7


def test_scalar_variance_filter_matches_cvxpy():
    rng = np.random.default_rng(19)
    y = np.concatenate([rng.normal(0, 1, 10), rng.normal(0, 3, 10)])
    lam = 4.0
    x = cp.Variable(20, pos=True)
    prob = cp.Problem(
        cp.Minimize(cp.sum(cp.multiply(y ** 2, x)) - cp.sum(cp.log(x))
                    + lam * cp.norm1(cp.diff(x)))
    )
    prob.solve(solver=cp.CLARABEL)

    est, report = variance_filter(y, VarianceFilterSpec(lam=lam),
                                  SolverConfig(**TIGHT))
    assert report.converged
    # agreement limited by the generic solver's exponential-cone accuracy
    assert np.abs(est.precision[:, 0, 0] - x.value).max() < 1e-4


def test_matrix_variance_filter_matches_cvxpy():
    rng = np.random.default_rng(20)
    n, n_samples = 2, 8
    data = rng.normal(size=(n_samples, n)) @ np.array([[1.0, 0.4], [0.0, 0.8]])
    lam = 1.5
    xs = [cp.Variable((n, n), PSD=True) for _ in range(n_samples)]
    cost = 0
    for i in range(n_samples):
        gram = np.outer(data[i], data[i])
        cost += cp.sum(cp.multiply(gram, xs[i])) - cp.log_det(xs[i])
    for i in range(n_samples - 1):
        cost += lam * cp.norm(xs[i + 1] - xs[i], "fro")
    cp.Problem(cp.Minimize(cost)).solve(solver=cp.SCS, eps=1e-9,
                                        max_iters=200000)
    ref = np.array([x.value for x in xs])

    est, report = variance_filter(data, VarianceFilterSpec(lam=lam),
                                  SolverConfig(**TIGHT))
    assert report.converged
    assert np.abs(est.precision - ref).max() < 1e-5
