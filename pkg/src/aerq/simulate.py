"""Synthetic regression data and CSV input/output.

Each generated instance draws from its own random stream keyed by
``(seed, index)``, so a corpus comes out the same whatever order (or process)
its instances are produced in.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, TextIO

import numpy as np
from numpy.typing import NDArray

from .core import Dataset, DatasetError, validate_dataset

_LAW_RE = re.compile(r"^\s*(normal|t|student-t|pareto)\s*(?:\(\s*([^)]*)\s*\))?\s*$", re.I)


class CsvFormatError(DatasetError):
    pass


@dataclass(frozen=True)
class ErrorLaw:
    """Error distribution: ``normal``, ``t`` (param = df) or ``pareto`` (param = tail index)."""

    kind: str
    param: float | None = None

    def __str__(self) -> str:
        return self.kind if self.param is None else f"{self.kind}({self.param:g})"

    def sample(self, rng: np.random.Generator, n: int) -> NDArray[np.float64]:
        if self.kind == "normal":
            return rng.standard_normal(n)
        if self.kind == "t":
            return rng.standard_t(self.param, n)
        return rng.pareto(self.param, n)


def parse_error_law(spec: str) -> ErrorLaw:
    """Parse ``normal``, ``t(3)``, ``student-t(3)`` or ``pareto(1.5)``."""
    m = _LAW_RE.match(spec)
    if not m:
        raise ValueError(f"unknown error distribution {spec!r}")
    kind = m.group(1).lower()
    kind = "t" if kind == "student-t" else kind
    arg = m.group(2)
    if kind == "normal":
        if arg:
            raise ValueError("normal takes no parameter")
        return ErrorLaw("normal")
    if not arg:
        raise ValueError(f"{kind} needs a parameter, e.g. {kind}(3)")
    try:
        param = float(arg.split("=")[-1])
    except ValueError:
        raise ValueError(f"bad parameter in {spec!r}") from None
    if not (np.isfinite(param) and param > 0):
        raise ValueError(f"{kind} parameter must be positive, got {param}")
    return ErrorLaw(kind, param)


MIXED_LAWS = (ErrorLaw("normal"), ErrorLaw("t", 3.0), ErrorLaw("pareto", 1.5))


@dataclass(frozen=True)
class GeneratorSpec:
    """One synthetic design.

    ``hetero`` scales observation i's error by ``exp(hetero * mean_j x_ij)``;
    zero means homoscedastic. ``beta`` is the true ``(beta0, beta_1..p)``,
    defaulting to zeros.
    """

    n: int
    p: int
    law: ErrorLaw = ErrorLaw("normal")
    hetero: float = 0.0
    beta: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.p < 0 or self.n < self.p + 2:
            raise ValueError(f"need p >= 0 and n >= p + 2, got n={self.n}, p={self.p}")
        if self.beta is not None and len(self.beta) != self.p + 1:
            raise ValueError(f"beta needs {self.p + 1} entries, got {len(self.beta)}")


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    data: Dataset
    errors: NDArray[np.float64]
    beta: NDArray[np.float64]
    scales: NDArray[np.float64]


def instance_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def simulate(spec: GeneratorSpec, seed: int, index: int = 0) -> SyntheticSample:
    """``y = beta0 + x beta + scale * e`` with ``x`` uniform on [-1, 1]^p."""
    rng = instance_rng(seed, index)
    x = rng.uniform(-1.0, 1.0, size=(spec.n, spec.p))
    beta = np.zeros(spec.p + 1) if spec.beta is None else np.asarray(spec.beta, dtype=float)
    scales = np.exp(spec.hetero * x.mean(axis=1)) if spec.p > 0 else np.ones(spec.n)
    errors = scales * spec.law.sample(rng, spec.n)
    y = beta[0] + x @ beta[1:] + errors
    return SyntheticSample(validate_dataset(y, x), errors, beta, scales)


def corpus_specs(
    seed: int,
    count: int,
    n_range: tuple[int, int] = (8, 60),
    p_range: tuple[int, int] = (1, 5),
    laws: tuple[ErrorLaw, ...] = MIXED_LAWS,
    hetero_fraction: float = 0.5,
    hetero: float = 1.0,
) -> Iterator[GeneratorSpec]:
    """Per-instance designs for a verification corpus.

    Sizes, dimension and true coefficients are drawn from a stream separate
    from the data stream of the same index; laws cycle in order and the
    first ``hetero_fraction`` of each block of ten is heteroscedastic.
    """
    for k in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k, 1)))
        p = int(rng.integers(p_range[0], p_range[1] + 1))
        n = int(rng.integers(max(n_range[0], p + 2), n_range[1] + 1))
        beta = tuple(float(v) for v in rng.normal(size=p + 1))
        is_het = (k % 10) < round(10 * hetero_fraction)
        yield GeneratorSpec(n, p, laws[k % len(laws)], hetero if is_het else 0.0, beta)


def write_csv(data: Dataset, out: TextIO | str | Path) -> None:
    """Header ``y,x1..xp``; shortest round-trip decimal repr; LF endings."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(data, fh)
            return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["y"] + [f"x{j + 1}" for j in range(data.p)])
    for yi, xi in zip(data.y, data.x):
        writer.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    write_csv(data, buf)
    return buf.getvalue()


def load_csv(source: str | Path | TextIO, *, allow_exact: bool = False) -> Dataset:
    """Read ``y,x1..xp`` into a validated :class:`Dataset`."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return load_csv(fh, allow_exact=allow_exact)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CsvFormatError("empty file") from None
    if not header or header[0] != "y":
        raise CsvFormatError("first column must be named 'y'")
    expected = [f"x{j + 1}" for j in range(len(header) - 1)]
    if header[1:] != expected:
        raise CsvFormatError(f"regressor columns must be {','.join(expected) or '(none)'}, got {header[1:]}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        vals = []
        for name, cell in zip(header, row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise CsvFormatError(f"line {line_no}, column {name!r}: not a number: {cell!r}") from None
        rows.append(vals)
    if not rows:
        raise CsvFormatError("no data rows")
    arr = np.array(rows, dtype=float)
    return validate_dataset(arr[:, 0], arr[:, 1:], allow_exact=allow_exact)
