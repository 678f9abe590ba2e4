"""Rank-dispersion R-estimator of the slopes under the extreme score function.

With scores ``a(i) = I[i = n] - 1/n`` the Jaeckel dispersion collapses to the
largest centered residual minus the response mean, so minimizing it is a
one-sided Chebyshev (minimax) fit and is solved exactly as an LP.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import DEFAULT_TOLERANCES, Dataset, NumericalError, Tolerances
from .rankscores import ranks_of
from .simplex import LpStatus, make_lp, solve_lp


class RankTieWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class RFit:
    slope: NDArray[np.float64]
    intercept: float
    minimax_value: float
    dispersion_at_opt: float


def extreme_score(u: ArrayLike, n: int) -> NDArray[np.float64]:
    """``phi_n(u) = I[u >= 1 - 1/n] - 1/n`` on [0, 1]."""
    u = np.asarray(u, dtype=float)
    return (u >= 1.0 - 1.0 / n).astype(float) - 1.0 / n


def _centered_residuals(data: Dataset, b: NDArray) -> NDArray:
    return data.y - (data.x - data.x_mean) @ b


def dispersion(data: Dataset, b: ArrayLike) -> float:
    """``max_i {y_i - (x_i - xbar)' b} - ybar``."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (data.p,):
        raise ValueError(f"slope vector must have length {data.p}")
    return float(_centered_residuals(data, b).max() - data.y_mean)


def dispersion_rank_form(data: Dataset, b: ArrayLike) -> float | None:
    """The dispersion from its rank definition ``sum r_i phi_n(R_i / (n + 1))``.

    Returns ``None`` (with a :class:`RankTieWarning`) when residuals tie, since
    the score function jumps at the top rank.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    r = data.y - data.x @ b
    if np.unique(r).size < r.size:
        warnings.warn("tied residuals; rank form skipped", RankTieWarning, stacklevel=2)
        return None
    n = data.n
    return float(r @ extreme_score(ranks_of(r) / (n + 1.0), n))


def fit_r_estimator(data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES) -> RFit:
    """Minimize the dispersion: ``min t`` s.t. ``t + (x_i - xbar)' b >= y_i``.

    The intercept is then the largest raw residual ``max_i {y_i - x_i' b}``.
    When the optimal face is not a single point the simplex's vertex is
    reported; only the minimax value is unique.
    """
    xc = data.x - data.x_mean
    a = np.column_stack([np.ones(data.n), xc])
    c = np.zeros(data.p + 1)
    c[0] = 1.0
    sol = solve_lp(make_lp(c, a, data.y, ">=", lower=None))
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"minimax slope LP ended with status {sol.status.value}")
    slope = sol.x[1:].copy()
    minimax = float(_centered_residuals(data, slope).max())
    if abs(minimax - sol.x[0]) > tol.scaled(1.0 + abs(minimax)) * 10:
        raise NumericalError("minimax LP value disagrees with the recomputed maximum")
    intercept = float((data.y - data.x @ slope).max())
    return RFit(slope, intercept, minimax, minimax - data.y_mean)


def assemble_extended(fit: RFit) -> NDArray[np.float64]:
    """Intercept stacked over the slopes, a candidate extreme quantile."""
    return np.concatenate([[fit.intercept], fit.slope])
