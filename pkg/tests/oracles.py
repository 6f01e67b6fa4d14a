"""Independent reference implementations used to cross-check the library.

Everything here is coded directly from the defining optimization
problems with dense numpy linear algebra, deliberately sharing no code
with the package internals.
"""

import numpy as np


def difference_operator(n_blocks, dim):
    """Dense forward difference operator mapping (N*d,) to ((N-1)*d,)."""
    d = np.zeros(((n_blocks - 1) * dim, n_blocks * dim))
    eye = np.eye(dim)
    for i in range(n_blocks - 1):
        d[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = -eye
        d[i * dim:(i + 1) * dim, (i + 1) * dim:(i + 2) * dim] = eye
    return d


def dense_project(w, v):
    """Projection onto {(z, s): s = Dz} by solving the normal equations
    densely with numpy."""
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    n, dim = w.shape
    d = difference_operator(n, dim)
    m = np.eye(n * dim) + d.T @ d
    z = np.linalg.solve(m, w.ravel() + d.T @ v.ravel())
    return z.reshape(n, dim), (d @ z).reshape(n - 1, dim)


def group_soft(a, kappa):
    norm = np.linalg.norm(a)
    if norm <= kappa:
        return np.zeros_like(a)
    return (1.0 - kappa / norm) * a


def textbook_chain_admm(samples, sigma, lam, rho, n_iter):
    """Plain two-block ADMM (no relaxation) for the group-penalized mean
    problem, with every update written out densely.

    Returns the lists of x- and z-iterates (raveled), one entry per
    iteration.
    """
    samples = np.asarray(samples, dtype=float)
    n, dim = samples.shape
    sigma_inv = np.linalg.inv(sigma)
    system = sigma_inv + rho * np.eye(dim)
    d = difference_operator(n, dim)
    m = np.eye(n * dim) + d.T @ d

    z = np.zeros(n * dim)
    s = np.zeros((n - 1) * dim)
    u = np.zeros(n * dim)
    t = np.zeros((n - 1) * dim)
    xs, zs = [], []
    kappa = lam / rho
    for _ in range(n_iter):
        targets = (z - u).reshape(n, dim)
        x = np.linalg.solve(system, sigma_inv @ samples.T + rho * targets.T).T.ravel()
        r = np.concatenate(
            [group_soft((s - t).reshape(n - 1, dim)[i], kappa) for i in range(n - 1)]
        )
        z = np.linalg.solve(m, (x + u) + d.T @ (r + t))
        s_new = d @ z
        u = u + x - z
        t = t + r - s_new
        s = s_new
        xs.append(x.copy())
        zs.append(z.copy())
    return xs, zs


def bisect_lambda_max(solve_constant, lo, hi, rel_tol=1e-4):
    """Bisection for the smallest weight making ``solve_constant`` true.

    ``solve_constant(lam)`` must return True when the filter output at
    ``lam`` is constant. ``lo`` must test non-constant and ``hi``
    constant.
    """
    assert not solve_constant(lo)
    assert solve_constant(hi)
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if solve_constant(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
