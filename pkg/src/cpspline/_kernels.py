"""Evaluation kernels for cubic B-spline bases on uniform knot grids.

Two interchangeable backends implement the same Cox-de Boor recursion:
numba-compiled loops (the default whenever numba imports cleanly) and a
vectorized pure-numpy path. Set the environment variable
``CPSPLINE_DISABLE_NUMBA=1`` to force the numpy path; the benchmark in
``benchmarks/bench_kernels.py`` compares the two.

Conventions shared by every kernel: the knot vector has ``n + 4`` strictly
increasing entries for a basis of dimension ``n``, the data domain is
``[knots[3], knots[n]]``, and evaluation uses left-closed/right-open
intervals except that the right domain endpoint maps into the last interior
interval.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "basis_matrix",
    "quad_basis_matrix",
    "spline_values",
    "spline_derivs",
]


def _interval_indices_numpy(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    a = knots[3]
    h = knots[4] - knots[3]
    k = np.floor((x - a) / h).astype(np.int64) + 3
    return np.clip(k, 3, knots.size - 5)


def _local_cubic_rows(knots: np.ndarray, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Cox-de Boor triangle for the 4 cubic basis values on interval k."""
    m = x.size
    vals = np.zeros((m, 4))
    vals[:, 0] = 1.0
    left = np.empty((m, 4))
    right = np.empty((m, 4))
    for j in range(1, 4):
        left[:, j] = x - knots[k + 1 - j]
        right[:, j] = knots[k + j] - x
        saved = np.zeros(m)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved
    return vals


def _local_quad_rows(knots: np.ndarray, x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Same triangle, degree 2: values of the 3 quadratic splines on interval k."""
    m = x.size
    vals = np.zeros((m, 3))
    vals[:, 0] = 1.0
    left = np.empty((m, 3))
    right = np.empty((m, 3))
    for j in range(1, 3):
        left[:, j] = x - knots[k + 1 - j]
        right[:, j] = knots[k + j] - x
        saved = np.zeros(m)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved
    return vals


def _basis_matrix_numpy(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = knots.size - 4
    k = _interval_indices_numpy(knots, x)
    vals = _local_cubic_rows(knots, x, k)
    out = np.zeros((x.size, n))
    rows = np.arange(x.size)[:, None]
    cols = k[:, None] + np.arange(-3, 1)[None, :]
    out[rows, cols] = vals
    return out


def _quad_basis_matrix_numpy(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = knots.size - 4
    k = _interval_indices_numpy(knots, x)
    vals = _local_quad_rows(knots, x, k)
    out = np.zeros((x.size, n))
    rows = np.arange(x.size)[:, None]
    cols = k[:, None] + np.arange(-2, 1)[None, :]
    out[rows, cols] = vals
    return out


def _spline_values_numpy(knots: np.ndarray, coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    k = _interval_indices_numpy(knots, x)
    vals = _local_cubic_rows(knots, x, k)
    cols = k[:, None] + np.arange(-3, 1)[None, :]
    return np.einsum("ij,ij->i", vals, coef[cols])


def _spline_derivs_numpy(knots: np.ndarray, coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    h = knots[4] - knots[3]
    k = _interval_indices_numpy(knots, x)
    vals = _local_quad_rows(knots, x, k)
    d = np.diff(coef) / h
    cols = k[:, None] + np.arange(-3, 0)[None, :]
    return np.einsum("ij,ij->i", vals, d[cols])


def _make_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def _cubic_row(knots, x, k, out):
        left = np.empty(4)
        right = np.empty(4)
        out[0] = 1.0
        for j in range(1, 4):
            left[j] = x - knots[k + 1 - j]
            right[j] = knots[k + j] - x
            saved = 0.0
            for r in range(j):
                temp = out[r] / (right[r + 1] + left[j - r])
                out[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            out[j] = saved

    @njit(cache=True)
    def _quad_row(knots, x, k, out):
        left = np.empty(3)
        right = np.empty(3)
        out[0] = 1.0
        for j in range(1, 3):
            left[j] = x - knots[k + 1 - j]
            right[j] = knots[k + j] - x
            saved = 0.0
            for r in range(j):
                temp = out[r] / (right[r + 1] + left[j - r])
                out[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            out[j] = saved

    @njit(cache=True)
    def _interval(knots, x):
        a = knots[3]
        h = knots[4] - knots[3]
        k = int(np.floor((x - a) / h)) + 3
        hi = knots.size - 5
        if k < 3:
            k = 3
        elif k > hi:
            k = hi
        return k

    @njit(cache=True)
    def basis_matrix_nb(knots, x):
        n = knots.size - 4
        out = np.zeros((x.size, n))
        row = np.empty(4)
        for i in range(x.size):
            k = _interval(knots, x[i])
            _cubic_row(knots, x[i], k, row)
            for r in range(4):
                out[i, k - 3 + r] = row[r]
        return out

    @njit(cache=True)
    def quad_basis_matrix_nb(knots, x):
        n = knots.size - 4
        out = np.zeros((x.size, n))
        row = np.empty(3)
        for i in range(x.size):
            k = _interval(knots, x[i])
            _quad_row(knots, x[i], k, row)
            for r in range(3):
                out[i, k - 2 + r] = row[r]
        return out

    @njit(cache=True)
    def spline_values_nb(knots, coef, x):
        out = np.empty(x.size)
        row = np.empty(4)
        for i in range(x.size):
            k = _interval(knots, x[i])
            _cubic_row(knots, x[i], k, row)
            acc = 0.0
            for r in range(4):
                acc += row[r] * coef[k - 3 + r]
            out[i] = acc
        return out

    @njit(cache=True)
    def spline_derivs_nb(knots, coef, x):
        h = knots[4] - knots[3]
        out = np.empty(x.size)
        row = np.empty(3)
        for i in range(x.size):
            k = _interval(knots, x[i])
            _quad_row(knots, x[i], k, row)
            acc = 0.0
            for r in range(3):
                acc += row[r] * (coef[k - 2 + r] - coef[k - 3 + r]) / h
            out[i] = acc
        return out

    return basis_matrix_nb, quad_basis_matrix_nb, spline_values_nb, spline_derivs_nb


def _numba_disabled() -> bool:
    return os.environ.get("CPSPLINE_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
        "on",
    )


if not _numba_disabled():
    try:
        basis_matrix, quad_basis_matrix, spline_values, spline_derivs = _make_numba_kernels()
        BACKEND = "numba"
    except ImportError:
        basis_matrix = _basis_matrix_numpy
        quad_basis_matrix = _quad_basis_matrix_numpy
        spline_values = _spline_values_numpy
        spline_derivs = _spline_derivs_numpy
        BACKEND = "numpy"
else:
    basis_matrix = _basis_matrix_numpy
    quad_basis_matrix = _quad_basis_matrix_numpy
    spline_values = _spline_values_numpy
    spline_derivs = _spline_derivs_numpy
    BACKEND = "numpy"
