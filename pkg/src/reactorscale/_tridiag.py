"""Tridiagonal (Thomas) solver used by the implicit finite-difference schemes."""

import numpy as np
from numba import njit


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for k in range(1, n):
        m = diag[k] - lower[k] * c[k - 1]
        c[k] = upper[k] / m
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / m
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for k in range(n - 2, -1, -1):
        x[k] = d[k] - c[k] * x[k + 1]
    return x


def solve_tridiagonal(lower, diag, upper, rhs):
    """
    Solve a tridiagonal system with the Thomas algorithm.

    Parameters
    ----------
    lower : ndarray
        Sub-diagonal, length n, ``lower[0]`` is ignored.
    diag : ndarray
        Main diagonal, length n.
    upper : ndarray
        Super-diagonal, length n, ``upper[-1]`` is ignored.
    rhs : ndarray
        Right-hand side, length n.

    Returns
    -------
    x : ndarray
        Solution vector.

    Notes
    -----
    No pivoting is performed; the systems assembled in this package are
    diagonally dominant.
    """
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    n = diag.shape[0]
    if not (lower.shape[0] == upper.shape[0] == rhs.shape[0] == n):
        raise ValueError("lower, diag, upper and rhs must have equal length")
    if n == 0:
        return np.empty(0)
    return _thomas(lower, diag, upper, rhs)
