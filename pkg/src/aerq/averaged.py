"""Averaged regression quantiles and the cross-checked averaged extreme one.

The extreme (alpha = 1) regression quantile averaged over the design,
``B = xbar*' beta_hat(1)``, can be reached three ways, and
:func:`verify_identities` computes all of them:

* primal: average the fitted extreme hyperplane over the design;
* weights: a convex combination of the responses on the optimal base;
* minimax: the smallest achievable maximum of the centered residuals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    AerqError,
    BaseWeights,
    Dataset,
    DegeneracyError,
    DegeneracyWarning,
    NumericalError,
    QuantileFit,
    Tolerances,
    solve_square_system,
)
from .rankscores import derivative_at_one, score_identity_errors
from .restimator import fit_r_estimator
from .rq import ExtremeFit, extract_base, fit_extreme_rq

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped-degenerate"


def averaged_rq(fit: QuantileFit, data: Dataset) -> float:
    """``xbar*' beta_hat(alpha)``: the fitted hyperplane at the mean regressor."""
    return float(fit.beta0 + data.x_mean @ fit.slopes)


def aerq_via_weights(
    data: Dataset, base: Sequence[int], tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[float, BaseWeights]:
    """``sum_k w_k y_{i_k}`` with ``w' = n^{-1} 1' X* (X*_base)^{-1}``.

    Nonpositive weights are possible only off the probability-one event, so
    they produce a :class:`DegeneracyWarning` and a note, not an error.
    """
    idx = tuple(int(i) for i in base)
    design = data.design
    sub = design[list(idx)]
    w = solve_square_system(sub.T, design.sum(axis=0) / data.n, tol).unwrap()
    notes = []
    if abs(w.sum() - 1.0) > tol.weight_sum:
        raise NumericalError(f"base weights sum to {w.sum()!r}, not 1")
    if np.any(w <= 0):
        notes.append("nonpositive base weight")
        warnings.warn("optimal-base weights are not all positive", DegeneracyWarning, stacklevel=2)
    sub.setflags(write=False)
    w.setflags(write=False)
    bw = BaseWeights(idx, w, sub, tuple(notes))
    return float(w @ data.y[list(idx)]), bw


def aerq_via_restimator(data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``max_i {y_i - (x_i - xbar)' b}`` at the minimax slope."""
    return fit_r_estimator(data, tol).minimax_value


def shortfall(data: Dataset, fit: ExtremeFit, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Expected conditional shortfall ``ybar - B``, which is never positive.

    Computed both as ``ybar - B`` and as minus the mean negative part of the
    residuals; the two must agree.
    """
    direct = data.y_mean - averaged_rq(fit, data)
    via_parts = -float(np.maximum(-fit.residuals, 0.0).mean())
    if abs(direct - via_parts) > tol.route * (1.0 + abs(direct)) + tol.active * (1.0 + np.abs(data.y).max()):
        raise NumericalError(f"shortfall forms disagree: {direct!r} vs {via_parts!r}")
    return direct


@dataclass(frozen=True, eq=False)
class AerqReport:
    b_primal: float
    b_weights: float | None
    b_restimator: float
    weights: BaseWeights | None
    shortfall: float
    max_y: float
    mean_y: float
    discrepancies: dict[str, float]
    verdict: str
    notes: tuple[str, ...] = field(default=())

    @property
    def base_indices(self) -> tuple[int, ...] | None:
        return None if self.weights is None else self.weights.indices

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready mapping with a fixed key order; base indices are 1-based."""
        def num(v: float | None) -> float | None:
            return None if v is None or not math.isfinite(v) else float(v)

        return {
            "b_primal": num(self.b_primal),
            "b_weights": num(self.b_weights),
            "b_restimator": num(self.b_restimator),
            "weights": None if self.weights is None else [float(w) for w in self.weights.weights],
            "base_indices": None if self.weights is None else [i + 1 for i in self.weights.indices],
            "shortfall": num(self.shortfall),
            "mean_y": num(self.mean_y),
            "max_y": num(self.max_y),
            "discrepancies": {k: num(v) for k, v in self.discrepancies.items()},
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _close(a: float, b: float, tol: Tolerances) -> tuple[float, bool]:
    gap = abs(a - b)
    return gap, gap <= tol.route * (1.0 + abs(a))


def verify_identities(data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES) -> AerqReport:
    """Compute B by every route and check the finite-sample identities.

    Degenerate instances (ties in the active set, an exact fit, nonpositive
    weights) get verdict ``skipped-degenerate`` and no hard assertions.
    """
    fit = fit_extreme_rq(data, tol)
    b_primal = averaged_rq(fit, data)
    b_r = aerq_via_restimator(data, tol)
    sf = shortfall(data, fit, tol)
    max_y, mean_y = float(data.y.max()), data.y_mean
    notes: list[str] = []
    gaps: dict[str, float] = {}
    gaps["primal-restimator"], ok_r = _close(b_primal, b_r, tol)

    try:
        sel = extract_base(fit, data, tol)
    except DegeneracyError as exc:
        notes.append(str(exc))
        return AerqReport(b_primal, None, b_r, None, sf, max_y, mean_y, gaps, SKIPPED, tuple(notes))
    if sel.complete:
        notes.append("exact interpolation: n = p + 1")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        b_w, bw = aerq_via_weights(data, sel.indices, tol)
    notes.extend(bw.notes)
    gaps["primal-weights"], ok_w = _close(b_primal, b_w, tol)
    gaps["weights-restimator"], _ = _close(b_w, b_r, tol)

    deriv = derivative_at_one(data, sel.indices, tol)
    b_scores = -float(data.y @ deriv.derivative) / data.n
    gaps["primal-scores"], ok_s = _close(b_primal, b_scores, tol)
    id_total, id_cols = score_identity_errors(data, deriv)
    gaps["score-identities"] = max(id_total, id_cols)

    if sel.complete or not bw.positive:
        return AerqReport(b_primal, b_w, b_r, bw, sf, max_y, mean_y, gaps, SKIPPED, tuple(notes))

    checks = {
        "primal and weights routes disagree": ok_w,
        "primal and minimax routes disagree": ok_r,
        "score-derivative route disagrees": ok_s,
        "score-derivative identities fail": max(id_total, id_cols) <= tol.identity,
        "B below the response mean": b_primal >= mean_y - tol.ordering,
        "B exceeds the maximum response": (
            b_primal < max_y if data.p > 0 else abs(b_primal - max_y) <= tol.scaled(max_y)
        ),
        "positive shortfall": sf <= tol.scaled(mean_y),
    }
    failed = [msg for msg, ok in checks.items() if not ok]
    notes.extend(failed)
    return AerqReport(
        b_primal, b_w, b_r, bw, sf, max_y, mean_y, gaps, FAIL if failed else PASS, tuple(notes)
    )


def safe_verify(data: Dataset, tol: Tolerances = DEFAULT_TOLERANCES) -> AerqReport:
    """:func:`verify_identities`, turning a solver failure into a ``fail`` report."""
    try:
        return verify_identities(data, tol)
    except AerqError as exc:
        nan = float("nan")
        return AerqReport(
            nan, None, nan, None, nan, float(data.y.max()), data.y_mean, {}, FAIL,
            (f"{type(exc).__name__}: {exc}",),
        )
