"""Regression rank scores: the dual of the quantile LP, its location-model
closed form, and the left derivative of the scores at level one."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import (
    DEFAULT_TOLERANCES,
    BaseWeights,
    Dataset,
    NumericalError,
    QuantileFit,
    Tolerances,
    solve_square_system,
)
from .simplex import LpStatus, make_lp, solve_lp


class BreakpointWarning(UserWarning):
    """A finite-difference stencil straddles a kink of the score trajectory."""


@dataclass(frozen=True, eq=False)
class RankScoreSolution:
    alpha: float
    scores: NDArray[np.float64]
    dual_objective: float


@dataclass(frozen=True, eq=False)
class ScoreDerivativeAtOne:
    derivative: NDArray[np.float64]
    base: tuple[int, ...]


def dual_constraint_residual(data: Dataset, sol: RankScoreSolution) -> float:
    """``max |X*' a - (1 - alpha) X*' 1|``."""
    design = data.design
    target = (1.0 - sol.alpha) * design.sum(axis=0)
    return float(np.abs(design.T @ sol.scores - target).max())


def solve_rank_scores(
    data: Dataset,
    alpha: float,
    fit: QuantileFit | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RankScoreSolution:
    """Maximize ``y @ a`` over ``a in [0, 1]^n`` with ``X*' a = (1 - alpha) X*' 1``.

    The endpoints are returned in closed form: the first constraint row pins
    ``sum(a)`` to ``n`` at alpha = 0 and to ``0`` at alpha = 1, which leaves a
    single feasible point. If ``fit`` (a primal fit at the same level) is
    given, complementary slackness is checked: scores are 1 above the fitted
    hyperplane and 0 below it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    n = data.n
    if alpha == 0.0:
        scores = np.ones(n)
    elif alpha == 1.0:
        scores = np.zeros(n)
    else:
        design = data.design
        problem = make_lp(
            data.y, design.T, (1.0 - alpha) * design.sum(axis=0), "=",
            lower=0.0, upper=1.0, maximize=True,
        )
        sol = solve_lp(problem)
        if sol.status is not LpStatus.OPTIMAL:
            # a = (1 - alpha) 1 is always feasible and the box keeps it bounded
            raise NumericalError(f"rank-score LP ended with status {sol.status.value}")
        scores = sol.x
    out = RankScoreSolution(float(alpha), scores, float(data.y @ scores))

    if fit is not None:
        if fit.alpha != alpha:
            raise ValueError("primal fit and scores must share the same alpha")
        eps = tol.active * (1.0 + np.abs(data.y))
        above = fit.residuals > eps
        below = fit.residuals < -eps
        bad = np.abs(scores[above] - 1.0).max(initial=0.0) + np.abs(scores[below]).max(initial=0.0)
        if bad > 1e-7:
            raise NumericalError(f"complementary slackness with the primal fit fails by {bad:.3g}")
    return out


def hajek_scores(ranks: ArrayLike, alpha: float) -> NDArray[np.float64]:
    """Location-model rank scores: 1, then ``R - n*alpha``, then 0."""
    r = np.asarray(ranks)
    n = r.shape[0]
    if r.ndim != 1 or not np.array_equal(np.sort(r), np.arange(1, n + 1)):
        raise ValueError("ranks must be a permutation of 1..n")
    r = r.astype(float)
    return np.where(
        alpha <= (r - 1.0) / n, 1.0, np.where(alpha <= r / n, r - n * alpha, 0.0)
    )


def ranks_of(values: ArrayLike) -> NDArray[np.int64]:
    """1-based ranks; ties go to the earlier index first."""
    v = np.asarray(values)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.shape[0], dtype=np.int64)
    ranks[order] = np.arange(1, v.shape[0] + 1)
    return ranks


def derivative_at_one(
    data: Dataset,
    base: BaseWeights | Sequence[int],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ScoreDerivativeAtOne:
    """Left derivative of the rank scores at level one, from the optimal base.

    On the base rows it equals ``-1' X* (X*_base)^{-1}``; elsewhere it is 0.
    """
    idx = tuple(int(i) for i in (base.indices if isinstance(base, BaseWeights) else base))
    design = data.design
    sub = design[list(idx)]
    # row vector 1'X* B^{-1} is the solution z of B' z = X*' 1
    z = solve_square_system(sub.T, design.sum(axis=0), tol).unwrap()
    deriv = np.zeros(data.n)
    deriv[list(idx)] = -z
    return ScoreDerivativeAtOne(deriv, idx)


def score_identity_errors(data: Dataset, deriv: ScoreDerivativeAtOne) -> tuple[float, float]:
    """Errors in ``sum a'(1) = -n`` and ``sum x_ij a'_i(1) = -sum x_ij``."""
    d = deriv.derivative
    total = abs(float(d.sum()) + data.n)
    cols = float(np.abs(data.x.T @ d + data.x.sum(axis=0)).max(initial=0.0))
    return total, cols


def _scores(data: Dataset, alpha: float) -> NDArray:
    return solve_rank_scores(data, alpha).scores


def averaged_rq_via_scores(
    data: Dataset,
    alpha_grid: ArrayLike,
    h: float = 1e-4,
    max_halvings: int = 12,
) -> NDArray[np.float64]:
    """Averaged regression quantile from the slope of the score trajectory.

    Uses ``-(1/n) y @ a'(alpha)`` with a central difference inside (0, 1) and
    a left difference at 1. The scores are piecewise linear, so a stencil
    inside one linear piece is exact; a stencil that fails the midpoint
    linearity check is halved, and if it never passes a
    :class:`BreakpointWarning` is issued and the last estimate is kept.
    """
    grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    out = np.empty(grid.shape[0])
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise ValueError("grid levels must lie in (0, 1]")
    for k, a in enumerate(grid):
        step = h if a == 1.0 else min(h, a / 2, (1.0 - a) / 2)
        for _ in range(max_halvings + 1):
            if a == 1.0:
                lo, mid, hi = _scores(data, 1.0 - step), _scores(data, 1.0 - step / 2), np.zeros(data.n)
            else:
                lo, mid, hi = _scores(data, a - step), _scores(data, a), _scores(data, a + step)
            slope = (hi - lo) / (step if a == 1.0 else 2.0 * step)
            out[k] = -float(data.y @ slope) / data.n
            if np.abs(mid - (lo + hi) / 2.0).max() <= 1e-9:
                break
            step /= 2.0
        else:
            warnings.warn(f"no linear stencil found around alpha={a}", BreakpointWarning, stacklevel=2)
    return out
