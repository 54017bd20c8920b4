"""Selection of the regularization parameter on a logarithmic grid.

The L-curve criterion picks the grid point maximizing the discrete Menger
curvature of (log residual norm, log roughness norm); GCV minimizes the
usual cross-validation score built from the smoother trace. Both run plain
per-candidate normal-equation solves, which is cheap at the basis sizes this
package targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .bsplines import KnotGrid
from .errors import AllFitsFailedError, SingularSystemError, TraceDegenerateError
from .fitting import Dataset, assemble, second_difference_matrix, solve_penalized

__all__ = [
    "LambdaGrid",
    "LCurvePoint",
    "LCurveResult",
    "GcvResult",
    "lcurve_select",
    "gcv_select",
]


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly increasing positive candidates, log-spaced by default."""

    values: np.ndarray = field(default_factory=lambda: np.logspace(-6.0, 6.0, 60))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("lambda grid must be a nonempty 1-d array")
        if np.any(v <= 0):
            raise ValueError("lambda values must be positive")
        if np.any(np.diff(v) <= 0):
            raise ValueError("lambda values must be strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def logspace(cls, lo: float = 1e-6, hi: float = 1e6, num: int = 60) -> "LambdaGrid":
        return cls(values=np.logspace(np.log10(lo), np.log10(hi), num))


@dataclass(frozen=True)
class LCurvePoint:
    lam: float
    residual_norm: float
    penalty_norm: float
    log_residual: float
    log_penalty: float


@dataclass(frozen=True)
class LCurveResult:
    lambda_star: float
    curve: list[LCurvePoint]
    curvature: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class GcvResult:
    lambda_star: float
    scores: np.ndarray
    traces: np.ndarray


def _menger_curvature(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Signed Menger curvature at each interior point; NaN at the endpoints."""
    kappa = np.full(xs.size, np.nan)
    for i in range(1, xs.size - 1):
        x1, x2, x3 = xs[i - 1], xs[i], xs[i + 1]
        y1, y2, y3 = ys[i - 1], ys[i], ys[i + 1]
        cross = (x2 - x1) * (y3 - y2) - (y2 - y1) * (x3 - x2)
        d12 = np.hypot(x2 - x1, y2 - y1)
        d23 = np.hypot(x3 - x2, y3 - y2)
        d13 = np.hypot(x3 - x1, y3 - y1)
        denom = d12 * d23 * d13
        kappa[i] = 2.0 * cross / denom if denom > 0 else 0.0
    return kappa


def lcurve_select(
    data: Dataset, grid: KnotGrid, lambdas: LambdaGrid | None = None
) -> LCurveResult:
    """Corner of the residual/roughness trade-off curve.

    Exactly linear data make the roughness norm vanish for every candidate;
    that degenerate case returns the largest lambda with a flag set.
    """
    lambdas = lambdas if lambdas is not None else LambdaGrid()
    dm = assemble(data, grid)
    d2 = second_difference_matrix(grid.n)
    sqw = np.sqrt(data.w)
    points: list[LCurvePoint] = []
    kept_lams: list[float] = []
    for lam in lambdas.values:
        try:
            coef = solve_penalized(dm, float(lam))
        except SingularSystemError:
            continue
        resid = float(np.linalg.norm(sqw * (dm.B @ coef - data.y)))
        pen = float(np.linalg.norm(d2 @ coef))
        points.append(
            LCurvePoint(
                lam=float(lam),
                residual_norm=resid,
                penalty_norm=pen,
                log_residual=float(np.log10(max(resid, 1e-300))),
                log_penalty=float(np.log10(max(pen, 1e-300))),
            )
        )
        kept_lams.append(float(lam))
    if not points:
        raise AllFitsFailedError("no lambda candidate produced a solvable system")

    pen_scale = 1e-12 * (1.0 + float(np.max(np.abs(data.y))))
    if max(pt.penalty_norm for pt in points) <= pen_scale:
        kappa = np.full(len(points), np.nan)
        return LCurveResult(
            lambda_star=kept_lams[-1], curve=points, curvature=kappa, degenerate=True
        )

    if len(points) < 3:
        kappa = np.full(len(points), np.nan)
        return LCurveResult(
            lambda_star=kept_lams[len(points) // 2],
            curve=points,
            curvature=kappa,
            degenerate=False,
        )

    xs = np.array([pt.log_residual for pt in points])
    ys = np.array([pt.log_penalty for pt in points])
    kappa = _menger_curvature(xs, ys)
    best = 1
    for i in range(1, len(points) - 1):
        if kappa[i] >= kappa[best]:  # ties break toward larger lambda
            best = i
    return LCurveResult(
        lambda_star=kept_lams[best], curve=points, curvature=kappa, degenerate=False
    )


def gcv_select(
    data: Dataset, grid: KnotGrid, lambdas: LambdaGrid | None = None
) -> GcvResult:
    """Grid minimizer of m ||(I - S) y||^2 / tr(I - S)^2."""
    lambdas = lambdas if lambdas is not None else LambdaGrid()
    dm = assemble(data, grid)
    m = data.m
    scores = np.full(lambdas.values.size, np.nan)
    traces = np.full(lambdas.values.size, np.nan)
    for i, lam in enumerate(lambdas.values):
        H = dm.Q + float(lam) ** 2 * dm.T
        try:
            factor = cho_factor(H, lower=True)
        except (LinAlgError, ValueError):
            continue
        coef = cho_solve(factor, dm.btilde)
        trace_s = float(np.trace(cho_solve(factor, dm.Q)))
        denom = m - trace_s
        if denom <= 0:
            raise TraceDegenerateError(
                f"smoother trace {trace_s:.3f} leaves no residual degrees of freedom"
            )
        resid = data.y - dm.B @ coef
        scores[i] = m * float(resid @ resid) / denom**2
        traces[i] = trace_s
    if np.all(np.isnan(scores)):
        raise AllFitsFailedError("no lambda candidate produced a solvable system")
    best = int(np.nanargmin(scores))
    return GcvResult(
        lambda_star=float(lambdas.values[best]), scores=scores, traces=traces
    )
