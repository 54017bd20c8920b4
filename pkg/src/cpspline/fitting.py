"""Penalized spline regression: design assembly and the three fit variants.

The objective is the weighted residual sum of squares plus lam^2 times the
sum of squared second differences of adjacent basis coefficients. Variants:
unconstrained (normal equations), nonnegative coefficients (QP with identity
bounds), and value constraints s(z_i) >= eps_i at chosen sites (QP with
basis-row constraints, optionally with upper bounds).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bsplines import KnotGrid, SplineModel, basis_matrix, spline_values
from .errors import NotPositiveDefiniteError, SingularSystemError
from .qp import QpSolution, QuadraticProgram, solve_normal_equations, solve_qp

__all__ = [
    "Dataset",
    "DesignMatrices",
    "ConstraintSet",
    "second_difference_matrix",
    "assemble",
    "fit_pspline",
    "fit_nnp",
    "fit_constrained",
    "solve_penalized",
    "solve_constrained",
    "rmse",
]


@dataclass(frozen=True)
class Dataset:
    """Sites, responses, and positive weights; sites need not be sorted."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size < 4:
            raise ValueError(f"need at least 4 data points, got {x.size}")
        if self.w is None:
            w = np.ones_like(x)
        else:
            w = np.asarray(self.w, dtype=np.float64)
            if w.shape != x.shape:
                raise ValueError("weights must match the data length")
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class DesignMatrices:
    """Basis matrix B, penalty T, and the normal-equation blocks.

    Q = B' W B and btilde = B' W y, so the objective for coefficients a is
    a' (Q + lam^2 T) a - 2 btilde' a up to a constant.
    """

    B: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    btilde: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ConstraintSet:
    """Pointwise bounds: s(z) >= eps per lower pair, s(z) <= bound per upper."""

    lower: list[tuple[float, float]] = field(default_factory=list)
    upper: list[tuple[float, float]] | None = None

    def __post_init__(self):
        for _, eps in self.lower:
            if eps < 0:
                raise ValueError("lower bounds must be nonnegative")


def second_difference_matrix(n: int) -> np.ndarray:
    """(n-2) x n operator taking coefficients to their second differences."""
    d2 = np.zeros((n - 2, n))
    rows = np.arange(n - 2)
    d2[rows, rows] = 1.0
    d2[rows, rows + 1] = -2.0
    d2[rows, rows + 2] = 1.0
    return d2


def assemble(data: Dataset, grid: KnotGrid) -> DesignMatrices:
    B = basis_matrix(grid, data.x)
    d2 = second_difference_matrix(grid.n)
    T = d2.T @ d2
    WB = B * data.w[:, None]
    Q = B.T @ WB
    btilde = WB.T @ data.y
    return DesignMatrices(B=B, T=T, Q=Q, btilde=btilde)


def solve_penalized(dm: DesignMatrices, lam: float) -> np.ndarray:
    """Coefficients of the unconstrained fit: (Q + lam^2 T) a = btilde."""
    H = dm.Q + lam * lam * dm.T
    try:
        return solve_normal_equations(H, dm.btilde)
    except NotPositiveDefiniteError as exc:
        raise SingularSystemError(
            "normal equations are singular; the data may have fewer than two "
            "distinct sites, or lam = 0 with a rank-deficient basis"
        ) from exc


def fit_pspline(data: Dataset, grid: KnotGrid, lam: float) -> SplineModel:
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    coef = solve_penalized(assemble(data, grid), lam)
    return SplineModel(grid=grid, coefficients=coef)


def fit_nnp(data: Dataset, grid: KnotGrid, lam: float) -> SplineModel:
    """Penalized fit restricted to nonnegative coefficients."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    dm = assemble(data, grid)
    H = dm.Q + lam * lam * dm.T
    qp = QuadraticProgram(
        H=2.0 * H,
        f=-2.0 * dm.btilde,
        G=np.eye(grid.n),
        g=np.zeros(grid.n),
    )
    sol = solve_qp(qp)
    return SplineModel(grid=grid, coefficients=np.maximum(sol.a, 0.0))


def solve_constrained(
    dm: DesignMatrices,
    grid: KnotGrid,
    lam: float,
    cs: ConstraintSet,
    warm: QpSolution | None = None,
) -> QpSolution:
    """Constrained solve against preassembled design matrices."""
    H = dm.Q + lam * lam * dm.T
    G = g = U = u = None
    if cs.lower:
        z = np.array([z for z, _ in cs.lower], dtype=np.float64)
        G = basis_matrix(grid, z)
        g = np.array([eps for _, eps in cs.lower], dtype=np.float64)
    if cs.upper:
        zu = np.array([z for z, _ in cs.upper], dtype=np.float64)
        U = basis_matrix(grid, zu)
        u = np.array([bound for _, bound in cs.upper], dtype=np.float64)
    qp = QuadraticProgram(H=2.0 * H, f=-2.0 * dm.btilde, G=G, g=g, U=U, u=u)
    return solve_qp(qp, warm=warm)


def fit_constrained(
    data: Dataset,
    grid: KnotGrid,
    lam: float,
    cs: ConstraintSet,
    warm: QpSolution | None = None,
) -> tuple[SplineModel, QpSolution]:
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    sol = solve_constrained(assemble(data, grid), grid, lam, cs, warm=warm)
    return SplineModel(grid=grid, coefficients=sol.a), sol


def rmse(model: SplineModel, data: Dataset) -> float:
    resid = data.y - spline_values(model, data.x)
    return float(np.sqrt(np.mean(resid * resid)))
