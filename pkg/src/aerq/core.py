"""Data model, tolerances and small dense linear algebra shared by the solvers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray


class AerqError(Exception):
    """Base class for all errors raised by the package."""


class DatasetError(AerqError, ValueError):
    """Invalid input data."""


class DimensionMismatchError(DatasetError):
    pass


class NonFiniteError(DatasetError):
    pass


class RankDeficiencyError(DatasetError):
    pass


class NumericalError(AerqError):
    """Internal numerical inconsistency (should not happen on valid input)."""


class SingularMatrixError(NumericalError):
    pass


class DegeneracyError(AerqError):
    """The LP optimum is degenerate, so the requested object is not well defined."""


class DegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by the solvers, in one place.

    Attributes:
        absolute: generic absolute tolerance (LP feasibility/optimality).
        relative: generic relative tolerance, scaled by problem magnitude.
        rank: pivot ratio below which a matrix is declared rank deficient.
        active: a constraint is active when ``|residual| <= active * (1 + |y|)``.
        route: cross-route equality, ``|B1 - B2| <= route * (1 + |B1|)``.
        weight_sum: allowed deviation of the base weights from summing to one.
        identity: allowed error in the score-derivative summation identities.
        ordering: slack allowed in ``mean(y) <= B``.
    """

    absolute: float = 1e-9
    relative: float = 1e-9
    rank: float = 1e-10
    active: float = 1e-8
    route: float = 1e-8
    weight_sum: float = 1e-10
    identity: float = 1e-8
    ordering: float = 1e-10

    def scaled(self, scale: float) -> float:
        return self.absolute + self.relative * abs(scale)


DEFAULT_TOLERANCES = Tolerances()


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Responses ``y`` (length n) and regressors ``x`` (n x p, p may be 0).

    Build instances through :func:`validate_dataset`; the constructor does not
    check anything.
    """

    y: NDArray[np.float64]
    x: NDArray[np.float64]

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def design(self) -> NDArray[np.float64]:
        """Intercept-augmented design matrix ``[1 | x]``."""
        return np.column_stack([np.ones(self.n), self.x])

    @property
    def x_mean(self) -> NDArray[np.float64]:
        return self.x.mean(axis=0)

    @property
    def design_mean(self) -> NDArray[np.float64]:
        return np.concatenate([[1.0], self.x_mean])

    @property
    def y_mean(self) -> float:
        return float(self.y.mean())

    @property
    def is_location(self) -> bool:
        return self.p == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.y, other.y) and np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash((self.y.tobytes(), self.x.tobytes(), self.x.shape))


@dataclass(frozen=True, eq=False)
class QuantileFit:
    """A fitted regression quantile at level ``alpha``.

    ``active_set`` holds 0-based indices of observations with (numerically)
    zero residual.
    """

    alpha: float
    beta0: float
    slopes: NDArray[np.float64]
    objective: float
    active_set: tuple[int, ...]
    degenerate: bool
    fitted: NDArray[np.float64]
    residuals: NDArray[np.float64]

    @property
    def coef(self) -> NDArray[np.float64]:
        return np.concatenate([[self.beta0], self.slopes])


@dataclass(frozen=True, eq=False)
class BaseWeights:
    """Optimal-base indices (0-based), their weights and the base submatrix."""

    indices: tuple[int, ...]
    weights: NDArray[np.float64]
    base_matrix: NDArray[np.float64]
    notes: tuple[str, ...] = field(default=())

    @property
    def positive(self) -> bool:
        return bool(np.all(self.weights > 0))


@dataclass(frozen=True, eq=False)
class LinearSolveResult:
    """Outcome of a square solve: a solution or a singularity report.

    ``pivot_ratio`` is min |U_ii| / max |U_ii| of the LU factor, a cheap
    conditioning indicator.
    """

    solution: NDArray[np.float64] | None
    singular: bool
    pivot_ratio: float

    def unwrap(self) -> NDArray[np.float64]:
        if self.singular or self.solution is None:
            raise SingularMatrixError(
                f"matrix is numerically singular (pivot ratio {self.pivot_ratio:.3g})"
            )
        return self.solution


def solve_square_system(
    a: ArrayLike, b: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> LinearSolveResult:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    A singularity report (rather than an exception) comes back when the
    smallest pivot falls below ``tol.rank`` times the largest.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatchError("right-hand side does not match matrix size")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NonFiniteError("matrix or right-hand side has non-finite entries")
    if a.shape[0] == 0:
        return LinearSolveResult(np.zeros_like(b), False, 1.0)

    with warnings.catch_warnings():
        # singularity is reported through the result instead
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    top = pivots.max()
    ratio = float(pivots.min() / top) if top > 0 else 0.0
    if ratio < tol.rank:
        return LinearSolveResult(None, True, ratio)
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    return LinearSolveResult(x, False, ratio)


def numerical_rank(a: NDArray, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Rank from column-pivoted QR with a relative diagonal cutoff."""
    if a.size == 0:
        return 0
    r = scipy.linalg.qr(a, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag[0] == 0:
        return 0
    return int(np.sum(diag >= tol.rank * diag[0]))


def validate_dataset(
    y: ArrayLike | Dataset,
    x: ArrayLike | None = None,
    *,
    allow_exact: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Dataset:
    """Check raw responses and regressors and build a :class:`Dataset`.

    ``x`` may be ``None`` or have zero columns (location model). A 1-d ``x``
    is a single regressor. ``allow_exact`` admits n = p + 1, which only the
    interpolation-style edge cases need.
    """
    if isinstance(y, Dataset):
        if x is not None:
            raise TypeError("pass either a Dataset or raw (y, x), not both")
        y, x = y.y, y.x
    y_arr = np.asarray(y, dtype=float)
    if y_arr.ndim != 1:
        raise DimensionMismatchError(f"y must be a vector, got shape {y_arr.shape}")
    n = y_arr.shape[0]
    if x is None:
        x_arr = np.zeros((n, 0))
    else:
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 1:
            x_arr = x_arr.reshape(-1, 1)
        if x_arr.ndim != 2:
            raise DimensionMismatchError(f"x must be a matrix, got shape {x_arr.shape}")
    if x_arr.shape[0] != n:
        raise DimensionMismatchError(
            f"y has {n} observations but x has {x_arr.shape[0]} rows"
        )
    if not (np.all(np.isfinite(y_arr)) and np.all(np.isfinite(x_arr))):
        raise NonFiniteError("data contain NaN or infinite entries")
    p = x_arr.shape[1]
    min_n = p + 1 if allow_exact else p + 2
    if n < min_n:
        raise DimensionMismatchError(f"need at least {min_n} observations for p={p}, got {n}")

    design = np.column_stack([np.ones(n), x_arr])
    rank = numerical_rank(design, tol)
    if rank < p + 1:
        raise RankDeficiencyError(
            f"design matrix [1 | x] has rank {rank} < {p + 1}"
        )
    return Dataset(_frozen(y_arr), _frozen(x_arr))


def base_submatrix(data: Dataset, indices: Sequence[int]) -> NDArray[np.float64]:
    return data.design[np.asarray(indices, dtype=int)]
