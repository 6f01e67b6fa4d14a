"""Euclidean projection onto the chain constraint set.

The constraint couples a sequence of N blocks x_1..x_N to the sequence of
consecutive differences r_i = x_{i+1} - x_i. Projecting a pair (w, v)
onto that subspace reduces to the normal equations

    (I + D^T D) z = w + D^T v,      s = D z,

where D is the forward difference operator. I + D^T D is block
tridiagonal with a Cholesky factor of the form L (x) I whose scalar
coefficients follow a short recursion, so the projection costs O(N d)
with no divisions in the sweeps once the reciprocals of the diagonal are
precomputed.
"""

from dataclasses import dataclass
import math

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@dataclass(frozen=True)
class ChainCholesky:
    """Scalar Cholesky coefficients of I + D^T D for ``n_blocks`` blocks.

    ``diag`` holds the N diagonal coefficients, ``subdiag`` the N-1
    subdiagonal ones, and ``inv_diag`` the precomputed reciprocals of
    ``diag`` so the solve sweeps multiply instead of divide.
    """

    n_blocks: int
    diag: np.ndarray
    subdiag: np.ndarray
    inv_diag: np.ndarray


def chain_factor(n_blocks):
    """Compute the chain Cholesky coefficients for ``n_blocks`` >= 2.

    The coefficients start at sqrt(2), interior rows satisfy
    l_{i+1,i} = -1/l_{i,i} and l_{i+1,i+1} = sqrt(3 - l_{i+1,i}^2), and
    the last row closes with l_{N,N} = sqrt(2 - l_{N,N-1}^2). They depend
    only on N, so the result can be computed once and reused for every
    projection of that length.
    """
    n_blocks = int(n_blocks)
    if n_blocks < 2:
        raise ValueError(
            "chain_factor requires at least 2 blocks (a single block has "
            "no difference constraints); got %d" % n_blocks
        )
    diag = np.empty(n_blocks)
    subdiag = np.empty(n_blocks - 1)
    diag[0] = math.sqrt(2.0)
    for i in range(n_blocks - 2):
        subdiag[i] = -1.0 / diag[i]
        diag[i + 1] = math.sqrt(3.0 - subdiag[i] * subdiag[i])
    subdiag[n_blocks - 2] = -1.0 / diag[n_blocks - 2]
    diag[n_blocks - 1] = math.sqrt(2.0 - subdiag[n_blocks - 2] ** 2)
    return ChainCholesky(
        n_blocks=n_blocks, diag=diag, subdiag=subdiag, inv_diag=1.0 / diag
    )


@njit(cache=True)
def _forward_sweep(b, subdiag, inv_diag, out):
    # Solve L y = b, one block row at a time (division-free).
    n, d = b.shape
    for j in range(d):
        out[0, j] = inv_diag[0] * b[0, j]
    for i in range(1, n):
        sub = subdiag[i - 1]
        inv = inv_diag[i]
        for j in range(d):
            out[i, j] = inv * (b[i, j] - sub * out[i - 1, j])


@njit(cache=True)
def _backward_sweep(y, subdiag, inv_diag, out):
    # Solve L^T z = y, last block row first (division-free).
    n, d = y.shape
    last = n - 1
    for j in range(d):
        out[last, j] = inv_diag[last] * y[last, j]
    for i in range(n - 2, -1, -1):
        sub = subdiag[i]
        inv = inv_diag[i]
        for j in range(d):
            out[i, j] = inv * (y[i, j] - sub * out[i + 1, j])


def project(chol, w, v):
    """Project (w, v) onto the chain subspace {(z, s) : s = Dz}.

    Parameters
    ----------
    chol : ChainCholesky
        Coefficients from :func:`chain_factor` for N = ``chol.n_blocks``.
    w : (N, d) array_like
        Block-vector part paired with z.
    v : (N-1, d) array_like
        Difference part paired with s.

    Returns
    -------
    z : (N, d) ndarray
    s : (N-1, d) ndarray
        ``s`` is formed as the exact consecutive differences of ``z``.
    """
    w = np.ascontiguousarray(w, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    n = chol.n_blocks
    if w.ndim != 2 or v.ndim != 2:
        raise ValueError("w and v must be 2-d arrays of shape (blocks, dim)")
    if w.shape[0] != n or v.shape[0] != n - 1:
        raise ValueError(
            "block counts (%d, %d) do not match factor for N=%d"
            % (w.shape[0], v.shape[0], n)
        )
    if w.shape[1] != v.shape[1]:
        raise ValueError(
            "block dimensions differ: w has %d, v has %d" % (w.shape[1], v.shape[1])
        )

    # b = w + D^T v
    b = np.empty_like(w)
    b[0] = w[0] - v[0]
    b[-1] = w[-1] + v[-1]
    if n > 2:
        b[1:-1] = w[1:-1] + v[:-1] - v[1:]

    y = np.empty_like(b)
    _forward_sweep(b, chol.subdiag, chol.inv_diag, y)
    z = np.empty_like(b)
    _backward_sweep(y, chol.subdiag, chol.inv_diag, z)
    s = z[1:] - z[:-1]
    return z, s
