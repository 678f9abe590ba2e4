"""Dense bounded-variable two-phase primal simplex.

Problems have the form::

    min/max  c @ x   s.t.  a[i] @ x  (<= | = | >=)  b[i],   lower <= x <= upper

with possibly infinite bounds. Inequality rows get a slack column, rows that a
crash basis cannot cover get an artificial column, and phase 1 drives the
artificials to zero. Nonbasic variables sit at a finite bound, or at zero when
free. Pricing is Dantzig's rule until degenerate pivots pile up, after which
Bland's smallest-index rule takes over until progress resumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .core import DEFAULT_TOLERANCES, DimensionMismatchError, NonFiniteError, NumericalError, Tolerances

SENSES = ("<=", "=", ">=")


class IterationLimitError(NumericalError):
    """The simplex did not terminate within the iteration budget."""


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _readonly(a: ArrayLike) -> NDArray[np.float64]:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A linear program. Build it with :func:`make_lp` to get defaults and checks."""

    c: NDArray[np.float64]
    a: NDArray[np.float64]
    b: NDArray[np.float64]
    senses: tuple[str, ...]
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    maximize: bool = False

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.b.shape[0]


def make_lp(
    c: ArrayLike,
    a: ArrayLike | None = None,
    b: ArrayLike | None = None,
    senses: Sequence[str] | str | None = None,
    lower: ArrayLike | float | None = 0.0,
    upper: ArrayLike | float | None = np.inf,
    maximize: bool = False,
) -> LpProblem:
    """Validate and freeze an :class:`LpProblem`.

    ``lower``/``upper`` broadcast from scalars; ``None`` means unbounded on
    that side. A single sense string applies to every row.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nv = c.shape[0]
    if a is None:
        a = np.zeros((0, nv))
        b = np.zeros(0)
    a = np.asarray(a, dtype=float).reshape(-1, nv)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m = a.shape[0]
    if b.shape != (m,):
        raise DimensionMismatchError(f"rhs has shape {b.shape}, expected ({m},)")
    if senses is None:
        senses = ("<=",) * m
    elif isinstance(senses, str):
        senses = (senses,) * m
    senses = tuple(senses)
    if len(senses) != m or any(s not in SENSES for s in senses):
        raise ValueError(f"senses must be {m} entries from {SENSES}")
    lower = np.broadcast_to(-np.inf if lower is None else np.asarray(lower, dtype=float), (nv,))
    upper = np.broadcast_to(np.inf if upper is None else np.asarray(upper, dtype=float), (nv,))
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NonFiniteError("LP coefficients must be finite")
    if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
        raise ValueError("each lower bound must not exceed its upper bound")
    if np.any(lower == np.inf) or np.any(upper == -np.inf):
        raise ValueError("bounds must allow at least one finite value")
    return LpProblem(
        _readonly(c), _readonly(a), _readonly(b), senses,
        _readonly(lower), _readonly(upper), bool(maximize),
    )


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Result of :func:`solve_lp`.

    ``basis`` lists standard-form column indices: ``0..n_vars-1`` are the
    problem variables, the next ones are slacks of the inequality rows in row
    order, and anything beyond are artificials left on redundant rows.
    ``duals`` follow the problem's own direction, so for a minimization a
    binding ``>=`` row has a nonnegative dual.
    """

    status: LpStatus
    x: NDArray[np.float64]
    basis: tuple[int, ...]
    objective: float
    duals: NDArray[np.float64]
    degenerate: bool
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class SimplexOptions:
    max_iter: int | None = None
    bland_after: int = 10
    refactor_every: int = 50
    pivot_tol: float = 1e-9
    tol: Tolerances = DEFAULT_TOLERANCES


class _Tableau:
    """Mutable solver state for one call; never shared."""

    def __init__(self, problem: LpProblem, options: SimplexOptions):
        self.opt = options
        tol = options.tol
        nv, m = problem.n_vars, problem.n_rows
        slack_cols = []
        for i, s in enumerate(problem.senses):
            if s != "=":
                col = np.zeros(m)
                col[i] = 1.0 if s == "<=" else -1.0
                slack_cols.append(col)
        n_slack = len(slack_cols)
        a = np.hstack([problem.a, np.array(slack_cols).T.reshape(m, n_slack)])
        lower = np.concatenate([problem.lower, np.zeros(n_slack)])
        upper = np.concatenate([problem.upper, np.full(n_slack, np.inf)])

        x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
        r = problem.b - a @ x
        self.feas_tol = tol.scaled(max(1.0, float(np.max(np.abs(problem.b), initial=0.0))))

        # Crash: a column whose only nonzero sits in row i can be basic there if
        # its implied value stays within bounds.
        nz = a != 0
        singles = np.flatnonzero(nz.sum(axis=0) == 1)
        home = nz[:, singles].argmax(axis=0) if m else np.zeros(0, dtype=int)
        basis = np.full(m, -1)
        for j, i in zip(singles.tolist(), home.tolist()):
            if basis[i] >= 0:
                continue
            val = x[j] + r[i] / a[i, j]
            if lower[j] - self.feas_tol <= val <= upper[j] + self.feas_tol:
                basis[i] = j
                x[j] = min(max(val, lower[j]), upper[j])
        art_rows = np.flatnonzero(basis < 0)
        n_art = art_rows.size
        art = np.zeros((m, n_art))
        for k, i in enumerate(art_rows):
            art[i, k] = 1.0 if r[i] >= 0 else -1.0
            basis[i] = a.shape[1] + k
        self.first_art = a.shape[1]
        self.a = np.hstack([a, art])
        self.b = problem.b.copy()
        self.lower = np.concatenate([lower, np.zeros(n_art)])
        self.upper = np.concatenate([upper, np.full(n_art, np.inf)])
        self.x = np.concatenate([x, np.abs(r[art_rows])])
        self.basis = basis
        self.n_vars = nv
        self.iterations = 0
        self.max_iter = options.max_iter or 50 * (m + self.a.shape[1])
        self.ratio_ties = False

        sign = -1.0 if problem.maximize else 1.0
        self.cost2 = np.concatenate([sign * problem.c, np.zeros(self.a.shape[1] - nv)])
        self.opt_tol = tol.scaled(max(1.0, float(np.max(np.abs(problem.c), initial=0.0))))

    @property
    def has_artificials(self) -> bool:
        return self.a.shape[1] > self.first_art

    def refactor(self, cost: NDArray) -> None:
        m = self.a.shape[0]
        is_basic = np.zeros(self.a.shape[1], dtype=bool)
        is_basic[self.basis] = True
        self.is_basic = is_basic
        self.cost = cost
        if m == 0:
            self.t = np.zeros((0, self.a.shape[1]))
            self.y = np.zeros(0)
            self.d = cost.copy()
            return
        bmat = self.a[:, self.basis]
        lu, piv = scipy.linalg.lu_factor(bmat, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.min() <= 1e-14 * diag.max():
            raise NumericalError("simplex basis became singular")
        nonbasic = ~is_basic
        rhs = self.b - self.a[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
        self.t = np.ascontiguousarray(scipy.linalg.lu_solve((lu, piv), self.a, check_finite=False))
        self.t[:, self.basis] = np.eye(m)
        self.y = scipy.linalg.lu_solve((lu, piv), cost[self.basis], trans=1, check_finite=False)
        self.d = cost - self.a.T @ self.y
        self.d[self.basis] = 0.0

    def entering(self, bland: bool) -> tuple[int, float] | None:
        nb = ~self.is_basic
        inc = nb & (self.x < self.upper) & (self.d < -self.opt_tol)
        dec = nb & (self.x > self.lower) & (self.d > self.opt_tol)
        gain = np.where(inc, -self.d, np.where(dec, self.d, 0.0))
        if not np.any(gain > 0):
            return None
        j = int(np.flatnonzero(gain > 0)[0]) if bland else int(np.argmax(gain))
        return j, (1.0 if inc[j] else -1.0)

    def step(self, j: int, sigma: float, bland: bool) -> str:
        """One simplex step on entering column ``j``; returns the step kind."""
        col = self.t[:, j]
        alpha = sigma * col
        ptol = self.opt.pivot_tol * max(1.0, float(np.abs(col).max(initial=0.0)))
        xb = self.x[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            room = np.where(alpha > 0, xb - self.lower[self.basis], self.upper[self.basis] - xb)
            ratios = room / np.abs(alpha)
        ratios[~(np.abs(alpha) > ptol)] = np.inf
        np.maximum(ratios, 0.0, out=ratios)
        theta_row = float(ratios.min()) if ratios.size else np.inf
        theta_flip = self.upper[j] - self.lower[j]

        if theta_flip <= theta_row:
            if not np.isfinite(theta_flip):
                return "unbounded"
            self.x[self.basis] = xb - sigma * theta_flip * col
            self.x[j] = self.upper[j] if sigma > 0 else self.lower[j]
            return "flip"
        if not np.isfinite(theta_row):
            return "unbounded"

        ties = np.flatnonzero(ratios <= theta_row + 1e-12 * max(1.0, theta_row))
        if ties.size > 1:
            self.ratio_ties = True
        r = int(ties[np.argmin(self.basis[ties])]) if bland else int(ties[0])

        leaving = self.basis[r]
        self.x[self.basis] = xb - sigma * theta_row * col
        self.x[j] += sigma * theta_row
        self.x[leaving] = self.lower[leaving] if alpha[r] > 0 else self.upper[leaving]
        self.pivot(r, j)
        return "degenerate" if theta_row <= self.feas_tol else "pivot"

    def pivot(self, r: int, j: int) -> None:
        col = self.t[:, j].copy()
        row = self.t[r] / col[r]
        self.t -= col[:, None] * row
        self.t[r] = row
        self.d -= self.d[j] * row
        self.d[j] = 0.0
        self.is_basic[self.basis[r]] = False
        self.is_basic[j] = True
        self.basis[r] = j

    def run(self, cost: NDArray) -> LpStatus:
        self.refactor(cost)
        streak = 0
        since_refactor = 0
        while True:
            choice = self.entering(bland=streak > self.opt.bland_after)
            if choice is None:
                if since_refactor == 0:
                    return LpStatus.OPTIMAL
                self.refactor(cost)
                since_refactor = 0
                continue
            if self.iterations >= self.max_iter:
                raise IterationLimitError(
                    f"simplex exceeded {self.max_iter} iterations"
                )
            self.iterations += 1
            kind = self.step(*choice, bland=streak > self.opt.bland_after)
            if kind == "unbounded":
                return LpStatus.UNBOUNDED
            streak = streak + 1 if kind == "degenerate" else 0
            since_refactor += 1
            if since_refactor >= self.opt.refactor_every:
                self.refactor(cost)
                since_refactor = 0

    def drive_out_artificials(self) -> None:
        for r in range(self.basis.size):
            if self.basis[r] < self.first_art:
                continue
            row = np.abs(self.t[r, : self.first_art]) * ~self.is_basic[: self.first_art]
            j = int(np.argmax(row)) if row.size else -1
            if j >= 0 and row[j] > 1e-7:
                self.pivot(r, j)
        # Artificials are pinned at zero from here on.
        self.upper[self.first_art:] = 0.0
        self.x[self.first_art:] = 0.0


def solve_lp(problem: LpProblem, options: SimplexOptions | None = None) -> LpSolution:
    """Solve ``problem``; deterministic for identical input.

    Raises :class:`IterationLimitError` when the iteration budget (default
    ``50 * (rows + columns)``) runs out.
    """
    options = options or SimplexOptions()
    tab = _Tableau(problem, options)
    nv = problem.n_vars

    if tab.has_artificials:
        phase1 = np.zeros(tab.a.shape[1])
        phase1[tab.first_art:] = 1.0
        tab.run(phase1)
        if float(tab.x[tab.first_art:].sum()) > tab.feas_tol:
            return LpSolution(
                LpStatus.INFEASIBLE, tab.x[:nv].copy(), tuple(int(k) for k in tab.basis),
                np.nan, np.full(problem.n_rows, np.nan), False, tab.iterations,
            )
        tab.drive_out_artificials()

    tab.ratio_ties = False
    status = tab.run(tab.cost2)
    sign = -1.0 if problem.maximize else 1.0
    x = tab.x[:nv].copy()
    if status is LpStatus.UNBOUNDED:
        return LpSolution(
            status, x, tuple(int(k) for k in tab.basis), sign * -np.inf,
            np.full(problem.n_rows, np.nan), False, tab.iterations,
        )
    xb = tab.x[tab.basis]
    at_bound = np.isclose(xb, tab.lower[tab.basis], rtol=0, atol=tab.feas_tol) | np.isclose(
        xb, tab.upper[tab.basis], rtol=0, atol=tab.feas_tol
    )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        basis=tuple(int(k) for k in tab.basis),
        objective=float(problem.c @ x),
        duals=sign * tab.y,
        degenerate=bool(np.any(at_bound) or tab.ratio_ties),
        iterations=tab.iterations,
    )


@dataclass(frozen=True)
class Certificate:
    """Independent optimality check of an LP solution."""

    passed: bool
    primal_infeasibility: float
    dual_infeasibility: float
    complementarity: float
    duality_gap: float
    violations: tuple[str, ...]


def certify_solution(
    problem: LpProblem, solution: LpSolution, tol: Tolerances = DEFAULT_TOLERANCES
) -> Certificate:
    """Recheck feasibility, dual feasibility, complementary slackness and the gap.

    Works only from the problem data plus the reported primal values and
    duals; nothing from the solver's internal state is trusted.
    """
    violations = []
    x = np.asarray(solution.x, dtype=float)
    sign = -1.0 if problem.maximize else 1.0
    c = sign * problem.c
    y = sign * np.asarray(solution.duals, dtype=float)
    a, b = problem.a, problem.b
    scale = max(
        1.0,
        float(np.max(np.abs(b), initial=0.0)),
        float(np.max(np.abs(c), initial=0.0)),
        abs(float(c @ x)) if np.all(np.isfinite(x)) else 0.0,
    )
    eps = tol.scaled(scale)

    if solution.status is not LpStatus.OPTIMAL or not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        return Certificate(False, np.inf, np.inf, np.inf, np.inf, ("solution is not a finite optimum",))

    act = a @ x - b
    senses = np.array(problem.senses)
    row_viol = np.where(senses == "<=", np.maximum(act, 0.0),
                        np.where(senses == ">=", np.maximum(-act, 0.0), np.abs(act)))
    bound_viol = np.maximum(problem.lower - x, 0.0) + np.maximum(x - problem.upper, 0.0)
    primal = float(max(row_viol.max(initial=0.0), bound_viol.max(initial=0.0)))
    if primal > eps:
        violations.append(f"primal infeasibility {primal:.3g}")

    z = c - a.T @ y
    dual_rows = np.where(senses == ">=", np.maximum(-y, 0.0),
                         np.where(senses == "<=", np.maximum(y, 0.0), 0.0))
    zpos, zneg = np.maximum(z, 0.0), np.minimum(z, 0.0)
    fin_l, fin_u = np.isfinite(problem.lower), np.isfinite(problem.upper)
    dual_vars = np.where(fin_l, 0.0, zpos) + np.where(fin_u, 0.0, -zneg)
    dual = float(max(dual_rows.max(initial=0.0), dual_vars.max(initial=0.0)))
    if dual > eps:
        violations.append(f"dual infeasibility {dual:.3g}")

    comp_rows = np.abs(y * act) * (senses != "=")
    lo_gap = np.where(fin_l, x - np.where(fin_l, problem.lower, 0.0), 0.0)
    up_gap = np.where(fin_u, np.where(fin_u, problem.upper, 0.0) - x, 0.0)
    comp_vars = zpos * np.abs(lo_gap) + (-zneg) * np.abs(up_gap)
    comp = float(max(comp_rows.max(initial=0.0), comp_vars.max(initial=0.0)))
    if comp > eps:
        violations.append(f"complementary slackness violated by {comp:.3g}")

    dual_obj = float(
        b @ y
        + np.sum(np.where(fin_l, zpos * np.where(fin_l, problem.lower, 0.0), 0.0))
        + np.sum(np.where(fin_u, zneg * np.where(fin_u, problem.upper, 0.0), 0.0))
    )
    gap = float(c @ x - dual_obj)
    if abs(gap) > eps:
        violations.append(f"duality gap {gap:.3g}")

    return Certificate(not violations, primal, dual, comp, abs(gap), tuple(violations))
