"""Regression quantiles: general level via the check-loss LP, and the extreme
(maximal) quantile as the lowest hyperplane lying on or above every point."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .core import (
    DEFAULT_TOLERANCES,
    Dataset,
    DegeneracyError,
    NumericalError,
    QuantileFit,
    Tolerances,
    numerical_rank,
)
from .simplex import LpStatus, make_lp, solve_lp


@dataclass(frozen=True, eq=False)
class ExtremeFit(QuantileFit):
    """Quantile fit at level one. ``base`` holds the candidate optimal base
    (the active constraints, 0-based)."""

    base: tuple[int, ...] = ()


class BaseSelection(NamedTuple):
    indices: tuple[int, ...]
    complete: bool  # n == p + 1: every observation is interpolated


def check_loss(alpha: float, residuals: NDArray) -> float:
    """Sum of ``alpha * r^+ + (1 - alpha) * r^-``."""
    r = np.asarray(residuals, dtype=float)
    return float(alpha * np.maximum(r, 0.0).sum() + (1.0 - alpha) * np.maximum(-r, 0.0).sum())


def active_set(data: Dataset, residuals: NDArray, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[int, ...]:
    thresh = tol.active * (1.0 + np.abs(data.y))
    return tuple(int(i) for i in np.flatnonzero(np.abs(residuals) <= thresh))


def _is_degenerate(data: Dataset, active: tuple[int, ...], tol: Tolerances) -> bool:
    if len(active) != data.p + 1:
        return True
    return numerical_rank(data.design[list(active)], tol) < data.p + 1


def fit_extreme_rq(data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES) -> ExtremeFit:
    """Minimize ``sum_i x*_i @ b`` subject to ``y_i <= x*_i @ b`` for all i.

    The minimizer need not be unique on tied data; the simplex's pivot rule
    then decides which vertex is reported.
    """
    design = data.design
    problem = make_lp(design.sum(axis=0), design, data.y, ">=", lower=None)
    sol = solve_lp(problem)
    if sol.status is LpStatus.UNBOUNDED:
        raise NumericalError("extreme quantile LP reported unbounded despite full-rank design")
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"extreme quantile LP ended with status {sol.status.value}")

    coef = sol.x
    fitted = design @ coef
    residuals = data.y - fitted
    if residuals.max() > tol.active * (1.0 + np.abs(data.y).max()):
        raise NumericalError("extreme quantile fit violates its constraints")
    active = active_set(data, residuals, tol)
    return ExtremeFit(
        alpha=1.0,
        beta0=float(coef[0]),
        slopes=coef[1:].copy(),
        objective=float(design.sum(axis=0) @ coef),
        active_set=active,
        degenerate=_is_degenerate(data, active, tol),
        fitted=fitted,
        residuals=residuals,
        base=active,
    )


def extract_base(
    fit: ExtremeFit, data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES
) -> BaseSelection:
    """The p + 1 observations whose constraints bind at the extreme fit.

    Raises :class:`DegeneracyError` if the active count is not p + 1 or the
    rows are (numerically) linearly dependent.
    """
    active = tuple(sorted(fit.active_set))
    if len(active) != data.p + 1:
        raise DegeneracyError(
            f"{len(active)} active constraints, expected exactly {data.p + 1}"
        )
    if numerical_rank(data.design[list(active)], tol) < data.p + 1:
        raise DegeneracyError("active rows do not form an invertible base")
    return BaseSelection(active, complete=data.n == data.p + 1)


def directional_derivatives(data: Dataset, fit: QuantileFit, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray:
    """One-sided derivatives of the check loss at ``fit`` along +-e_j.

    Returns an array of shape (2, p + 1): row 0 for +e_j, row 1 for -e_j.
    All entries are nonnegative at a minimizer.
    """
    a = fit.alpha
    design = data.design
    r = data.y - design @ fit.coef
    zero = np.abs(r) <= tol.active * (1.0 + np.abs(data.y))
    pos = (r > 0) & ~zero
    neg = (r < 0) & ~zero
    out = np.empty((2, design.shape[1]))
    for k, s in enumerate((1.0, -1.0)):
        g = s * design  # change of fitted value per unit step
        out[k] = (
            -a * g[pos].sum(axis=0)
            + (1.0 - a) * g[neg].sum(axis=0)
            + np.maximum(-a * g[zero], (1.0 - a) * g[zero]).sum(axis=0)
        )
    return out


def fit_rq(data: Dataset, alpha: float, tol: Tolerances = DEFAULT_TOLERANCES) -> QuantileFit:
    """Regression quantile at ``0 < alpha < 1`` by the check-loss LP.

    Variables are the coefficients (free) plus positive and negative residual
    parts ``u, v >= 0`` with ``X* b + u - v = y``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    n, k = data.n, data.p + 1
    design = data.design
    c = np.concatenate([np.zeros(k), np.full(n, alpha), np.full(n, 1.0 - alpha)])
    a = np.hstack([design, np.eye(n), -np.eye(n)])
    lower = np.concatenate([np.full(k, -np.inf), np.zeros(2 * n)])
    sol = solve_lp(make_lp(c, a, data.y, "=", lower=lower))
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"quantile LP ended with status {sol.status.value}")

    coef = sol.x[:k]
    fitted = design @ coef
    residuals = data.y - fitted
    active = active_set(data, residuals, tol)
    fit = QuantileFit(
        alpha=float(alpha),
        beta0=float(coef[0]),
        slopes=coef[1:].copy(),
        objective=check_loss(alpha, residuals),
        active_set=active,
        degenerate=_is_degenerate(data, active, tol),
        fitted=fitted,
        residuals=residuals,
    )
    worst = directional_derivatives(data, fit, tol).min()
    if worst < -tol.scaled(n * max(1.0, float(np.abs(design).max()))):
        raise NumericalError(f"quantile fit fails the subgradient check ({worst:.3g})")
    return fit


def fit_quantile(data: Dataset, alpha: float, tol: Tolerances = DEFAULT_TOLERANCES) -> QuantileFit:
    """Dispatch on ``alpha``: 1 is the extreme fit, 0 the minimal one (by
    reflecting ``y``), anything in between goes through :func:`fit_rq`."""
    if alpha == 1.0:
        return fit_extreme_rq(data, tol)
    if alpha == 0.0:
        mirrored = fit_extreme_rq(Dataset(-data.y, data.x), tol)
        residuals = -mirrored.residuals
        return QuantileFit(
            alpha=0.0,
            beta0=-mirrored.beta0,
            slopes=-mirrored.slopes,
            objective=-mirrored.objective,
            active_set=mirrored.active_set,
            degenerate=mirrored.degenerate,
            fitted=data.y - residuals,
            residuals=residuals,
        )
    return fit_rq(data, alpha, tol)
