"""Primal active-set solver for strictly convex quadratic programs.

Problems have the form

    min 1/2 a' H a + f' a    s.t.  G a >= g   and optionally   U a <= u,

with H symmetric positive definite. Both constraint blocks are handled as
one stack of rows A a >= b (upper rows negated), so the working-set logic is
uniform. H is factored once per solve; every working-set subproblem reduces
to a small Gram system in the factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    InfeasibleConstraintsError,
    IterationLimitError,
    NotPositiveDefiniteError,
)

__all__ = ["QuadraticProgram", "QpSolution", "solve_qp", "solve_normal_equations"]


@dataclass(frozen=True)
class QuadraticProgram:
    H: np.ndarray
    f: np.ndarray
    G: np.ndarray | None = None
    g: np.ndarray | None = None
    U: np.ndarray | None = None
    u: np.ndarray | None = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        n = f.size
        if H.shape != (n, n):
            raise ValueError(f"H must be {n}x{n}, got {H.shape}")
        scale = max(1.0, float(np.max(np.abs(H))))
        if np.max(np.abs(H - H.T)) > 1e-12 * scale:
            raise ValueError("H must be symmetric")
        object.__setattr__(self, "H", 0.5 * (H + H.T))
        object.__setattr__(self, "f", f)
        for mat_name, vec_name in (("G", "g"), ("U", "u")):
            mat = getattr(self, mat_name)
            vec = getattr(self, vec_name)
            if (mat is None) != (vec is None):
                raise ValueError(f"{mat_name} and {vec_name} must be given together")
            if mat is not None:
                mat = np.asarray(mat, dtype=np.float64)
                vec = np.asarray(vec, dtype=np.float64)
                if mat.ndim != 2 or mat.shape[1] != n or mat.shape[0] != vec.size:
                    raise ValueError(f"inconsistent {mat_name}/{vec_name} shapes")
                object.__setattr__(self, mat_name, mat)
                object.__setattr__(self, vec_name, vec)

    @property
    def n(self) -> int:
        return self.f.size

    @property
    def n_lower(self) -> int:
        return 0 if self.G is None else self.G.shape[0]

    @property
    def n_upper(self) -> int:
        return 0 if self.U is None else self.U.shape[0]

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints as rows A a >= b; upper rows are negated."""
        blocks_a, blocks_b = [], []
        if self.G is not None:
            blocks_a.append(self.G)
            blocks_b.append(self.g)
        if self.U is not None:
            blocks_a.append(-self.U)
            blocks_b.append(-self.u)
        if not blocks_a:
            return np.zeros((0, self.n)), np.zeros(0)
        return np.vstack(blocks_a), np.concatenate(blocks_b)


@dataclass(frozen=True)
class QpSolution:
    """Minimizer with its KKT certificate.

    ``active`` holds stacked row indices (lower-bound rows first, then upper
    rows); ``mu`` and ``nu`` are the full multiplier vectors for the lower
    and upper blocks, zero off the active set.
    """

    a: np.ndarray
    active: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    iterations: int
    objective_history: np.ndarray = field(repr=False)

    def objective(self, qp: QuadraticProgram) -> float:
        return float(0.5 * self.a @ qp.H @ self.a + qp.f @ self.a)


def solve_normal_equations(H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve H a = rhs for symmetric positive definite H via Cholesky."""
    H = np.asarray(H, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    try:
        factor = cho_factor(H, lower=True)
    except (LinAlgError, ValueError) as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc
    return cho_solve(factor, rhs)


def _restore_feasibility(x, A, b, solve_h, tol):
    """Push x onto the feasible side by H-metric projection.

    Violated rows are accumulated and treated as equalities; the projection
    in the H-metric is the least-squares restoration minimizing the step
    measured by H. The violated set only grows, so the loop terminates.
    """
    forced: list[int] = []
    for _ in range(A.shape[0] + 1):
        viol = b - A @ x
        bad = np.flatnonzero(viol > tol)
        if bad.size == 0:
            return x
        forced = sorted(set(forced) | set(bad.tolist()))
        Av = A[forced]
        Y = solve_h(Av.T)
        S = Av @ Y
        target = b[forced] - Av @ x
        try:
            delta = np.linalg.solve(S, target)
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(S, target, rcond=None)
        x = x + Y @ delta
    viol = b - A @ x
    if np.max(viol) > tol:
        raise InfeasibleConstraintsError(
            f"feasibility restoration failed (max violation {np.max(viol):.3e})"
        )
    return x


def solve_qp(qp: QuadraticProgram, warm: QpSolution | None = None) -> QpSolution:
    """Minimize the QP by a primal active-set method.

    A warm start reuses the previous minimizer as the starting point (after
    feasibility restoration); the working set is re-detected there, which
    keeps warm and cold solves convergent to the same unique minimizer.
    """
    n = qp.n
    try:
        factor = cho_factor(qp.H, lower=True)
    except (LinAlgError, ValueError) as exc:
        raise NotPositiveDefiniteError(f"H is not positive definite: {exc}") from exc

    def solve_h(rhs):
        return cho_solve(factor, rhs)

    A, b = qp.stacked()
    p = A.shape[0]
    x_free = solve_h(-qp.f)
    if p == 0:
        return QpSolution(
            a=x_free,
            active=np.zeros(0, dtype=np.int64),
            mu=np.zeros(qp.n_lower),
            nu=np.zeros(qp.n_upper),
            iterations=0,
            objective_history=np.array([0.5 * x_free @ qp.H @ x_free + qp.f @ x_free]),
        )

    tol_feas = 1e-9 * (1.0 + float(np.max(np.abs(b))) if b.size else 1.0)
    row_norms = np.maximum(np.linalg.norm(A, axis=1), 1e-300)

    x = np.array(warm.a, dtype=np.float64) if warm is not None else x_free.copy()
    if x.shape != (n,):
        raise ValueError(f"warm start has wrong dimension {x.shape}")
    x = _restore_feasibility(x, A, b, solve_h, tol_feas)

    working: list[int] = np.flatnonzero(np.abs(A @ x - b) <= tol_feas).tolist()

    hist: list[float] = []
    max_iter = 50 * (n + p)
    tol_step = 1e-11
    tol_mult = -1e-10

    def subproblem(rows):
        """Equality-constrained minimizer over {A_rows x = b_rows}.

        Cholesky failure of the Gram system signals linearly dependent
        working rows and is propagated to the caller.
        """
        if not rows:
            return x_free, np.zeros(0)
        Ar = A[rows]
        Y = solve_h(Ar.T)
        S = Ar @ Y
        s_factor = cho_factor(S, lower=True)
        lam = cho_solve(s_factor, b[rows] + Ar @ solve_h(qp.f))
        return Y @ lam + x_free, lam

    iterations = 0
    while True:
        if iterations > max_iter:
            raise IterationLimitError(
                f"active-set method exceeded {max_iter} iterations"
            )
        iterations += 1
        hist.append(float(0.5 * x @ qp.H @ x + qp.f @ x))
        try:
            x_eq, lam = subproblem(working)
        except (np.linalg.LinAlgError, LinAlgError):
            # Dependent working rows: drop the most recent addition.
            working.pop()
            continue
        step = x_eq - x
        step_size = float(np.max(np.abs(step)))
        if step_size <= tol_step * (1.0 + np.max(np.abs(x))):
            if lam.size == 0 or np.min(lam) >= tol_mult:
                break
            working.pop(int(np.argmin(lam)))
            continue
        # Ratio test over rows not in the working set.
        mask = np.ones(p, dtype=bool)
        mask[working] = False
        cand = np.flatnonzero(mask)
        ap = A[cand] @ step
        blocking = cand[ap < -1e-13 * row_norms[cand] * step_size]
        alpha = 1.0
        add = -1
        if blocking.size:
            slack = A[blocking] @ x - b[blocking]
            ratios = np.maximum(slack, 0.0) / -(A[blocking] @ step)
            j = int(np.argmin(ratios))
            if ratios[j] < alpha:
                alpha = float(ratios[j])
                ties = np.flatnonzero(ratios <= alpha + 1e-14)
                if ties.size > 1:
                    # Most-violated at the full step, scaled by row size.
                    full = (A[blocking[ties]] @ x_eq - b[blocking[ties]])
                    j = int(ties[np.argmin(full / row_norms[blocking[ties]])])
                add = int(blocking[j])
        x = x + alpha * step
        if add >= 0:
            working.append(add)

    mu = np.zeros(qp.n_lower)
    nu = np.zeros(qp.n_upper)
    lam = np.maximum(lam, 0.0)
    for r, val in zip(working, lam):
        if r < qp.n_lower:
            mu[r] = val
        else:
            nu[r - qp.n_lower] = val
    return QpSolution(
        a=x,
        active=np.array(sorted(working), dtype=np.int64),
        mu=mu,
        nu=nu,
        iterations=iterations,
        objective_history=np.array(hist),
    )
