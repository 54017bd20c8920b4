"""Cubic B-spline bases on uniform augmented knot grids.

A basis of dimension ``n`` lives on ``n + 4`` uniformly spaced knots, three
of which extend past each end of the data domain ``[a, b]``; the fourth knot
from each end coincides with the domain endpoint. All evaluation routines
reject points outside ``[a, b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

__all__ = [
    "KnotGrid",
    "SplineModel",
    "Interval",
    "build_knot_grid",
    "basis_row",
    "basis_matrix",
    "spline_eval",
    "spline_values",
    "spline_deriv",
    "spline_deriv_values",
    "lipschitz_bound",
    "spline_minimum",
    "greville_abscissae",
]

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class KnotGrid:
    """Uniform augmented knot sequence for a cubic basis of dimension n."""

    n: int
    a: float
    b: float
    h: float
    knots: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 7:
            raise ValueError(f"basis dimension must be at least 7, got {self.n}")
        if not self.a < self.b:
            raise ValueError(f"empty domain: [{self.a}, {self.b}]")
        knots = np.asarray(self.knots, dtype=np.float64)
        if knots.shape != (self.n + 4,):
            raise ValueError(f"expected {self.n + 4} knots, got {knots.shape}")
        steps = np.diff(knots)
        if np.any(steps <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.max(np.abs(steps - self.h)) > 1e-12 * max(1.0, abs(self.h)):
            raise ValueError("knots must be uniformly spaced")
        if knots[3] != self.a or knots[self.n] != self.b:
            raise ValueError("fourth knot from each end must equal the domain endpoint")
        object.__setattr__(self, "knots", knots)

    @property
    def num_intervals(self) -> int:
        """Number of knot intervals covering [a, b]."""
        return self.n - 3

    def contains(self, x: np.ndarray) -> np.ndarray:
        slack = _DOMAIN_SLACK * max(1.0, abs(self.a), abs(self.b))
        return (x >= self.a - slack) & (x <= self.b + slack)


@dataclass(frozen=True)
class SplineModel:
    """A knot grid paired with a coefficient vector of length grid.n."""

    grid: KnotGrid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=np.float64)
        if coef.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} coefficients, got shape {coef.shape}"
            )
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coef)

    def __call__(self, x):
        return spline_values(self, np.atleast_1d(np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: ({self.lo}, {self.hi})")


def build_knot_grid(a: float, b: float, n: int) -> KnotGrid:
    """Uniform grid of n + 4 knots with the data domain [a, b] four knots in.

    The spacing is h = (b - a) / (n - 3); three auxiliary knots extend past
    each domain endpoint.
    """
    if a >= b:
        raise ValueError(f"empty domain: [{a}, {b}]")
    if n < 7:
        raise ValueError(f"basis dimension must be at least 7, got {n}")
    h = (b - a) / (n - 3)
    knots = a + h * np.arange(-3, n + 1, dtype=np.float64)
    knots[3] = a
    knots[n] = b
    return KnotGrid(n=n, a=float(a), b=float(b), h=h, knots=knots)


def _check_domain(grid: KnotGrid, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    inside = grid.contains(x)
    if not np.all(inside):
        bad = x[~inside][0]
        raise ValueError(f"evaluation point {bad} outside domain [{grid.a}, {grid.b}]")
    return np.clip(x, grid.a, grid.b)


def basis_matrix(grid: KnotGrid, x: np.ndarray) -> np.ndarray:
    """Rows of cubic basis values, one row per evaluation point."""
    x = _check_domain(grid, np.atleast_1d(x))
    return _kernels.basis_matrix(grid.knots, x)


def basis_row(grid: KnotGrid, x: float) -> np.ndarray:
    """Basis values (B_1(x), ..., B_n(x)); at most four entries are nonzero."""
    return basis_matrix(grid, np.array([x], dtype=np.float64))[0]


def spline_values(model: SplineModel, x: np.ndarray) -> np.ndarray:
    x = _check_domain(model.grid, np.atleast_1d(x))
    return _kernels.spline_values(model.grid.knots, model.coefficients, x)


def spline_eval(model: SplineModel, x: float) -> float:
    return float(spline_values(model, np.array([x], dtype=np.float64))[0])


def spline_deriv_values(model: SplineModel, x: np.ndarray) -> np.ndarray:
    """First derivative via the quadratic basis on the same knots.

    s'(x) = sum_j (a_j - a_{j-1}) / h * B2_j(x), with B2 the quadratic
    B-splines of the grid.
    """
    x = _check_domain(model.grid, np.atleast_1d(x))
    return _kernels.spline_derivs(model.grid.knots, model.coefficients, x)


def spline_deriv(model: SplineModel, x: float) -> float:
    return float(spline_deriv_values(model, np.array([x], dtype=np.float64))[0])


def lipschitz_bound(model: SplineModel, iv: Interval) -> float:
    """Upper bound on sup |s'| over the interval.

    The derivative is a convex combination of the scaled coefficient
    differences that are supported on the interval, so their largest
    magnitude bounds |s'| there. Zero-length intervals are valid queries.
    """
    grid = model.grid
    lo, hi = _check_domain(grid, np.array([iv.lo, iv.hi], dtype=np.float64))
    h = grid.h
    k_lo = min(max(int(np.floor((lo - grid.a) / h)) + 3, 3), grid.n - 1)
    k_hi = min(max(int(np.floor((hi - grid.a) / h)) + 3, 3), grid.n - 1)
    j_first = max(k_lo - 2, 1)
    j_last = min(k_hi, grid.n - 1)
    d = np.diff(model.coefficients) / h
    return float(np.max(np.abs(d[j_first - 1 : j_last])))


def spline_minimum(model: SplineModel) -> tuple[float, float]:
    """Exact global minimum of the spline over [a, b] with its location.

    Per knot interval the derivative is quadratic in the local coordinate;
    candidate minimizers are the interval endpoints plus its real roots.
    """
    grid = model.grid
    coef = model.coefficients
    h = grid.h
    d = np.diff(coef) / h
    candidates = [grid.a, grid.b]
    for k in range(3, grid.n):
        d0, d1, d2 = d[k - 3], d[k - 2], d[k - 1]
        # s'(u) = 0.5 * ((d0 - 2 d1 + d2) u^2 + 2 (d1 - d0) u + (d0 + d1))
        alpha = d0 - 2.0 * d1 + d2
        beta = 2.0 * (d1 - d0)
        gamma = d0 + d1
        roots = []
        if abs(alpha) > 1e-300:
            disc = beta * beta - 4.0 * alpha * gamma
            if disc >= 0.0:
                sq = np.sqrt(disc)
                roots = [(-beta - sq) / (2.0 * alpha), (-beta + sq) / (2.0 * alpha)]
        elif abs(beta) > 1e-300:
            roots = [-gamma / beta]
        x_lo = grid.knots[k]
        for u in roots:
            if 0.0 < u < 1.0:
                candidates.append(min(max(x_lo + u * h, grid.a), grid.b))
    xs = np.array(candidates, dtype=np.float64)
    vals = spline_values(model, xs)
    i = int(np.argmin(vals))
    return float(vals[i]), float(xs[i])


def greville_abscissae(grid: KnotGrid) -> np.ndarray:
    """Coefficient sites: averaging a cubic basis function's interior knots."""
    t = grid.knots
    return (t[1 : grid.n + 1] + t[2 : grid.n + 2] + t[3 : grid.n + 3]) / 3.0
