"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 internal
numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Any, Sequence, TextIO

from . import __version__
from .averaged import FAIL, PASS, SKIPPED, averaged_rq, safe_verify, verify_identities
from .core import DEFAULT_TOLERANCES, AerqError, DatasetError, Tolerances
from .rankscores import dual_constraint_residual, solve_rank_scores
from .rq import fit_quantile
from .simulate import (
    MIXED_LAWS,
    GeneratorSpec,
    corpus_specs,
    load_csv,
    parse_error_law,
    simulate,
    write_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class InputError(Exception):
    pass


def _alpha(text: str) -> float:
    a = float(text)
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return a


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    lo_i = int(lo)
    hi_i = int(hi) if hi else lo_i
    if hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"empty range {text}")
    return lo_i, hi_i


def _seed(text: str) -> int:
    s = int(text)
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aerq", description="Regression quantiles, rank scores and the extreme quantile averaged over the design."
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCES.route,
                        help="cross-route equality tolerance (default %(default)g)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit a regression quantile")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=_alpha, default=1.0)

    p = sub.add_parser("rankscores", parents=[common], help="regression rank scores at a level")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=_alpha, required=True)

    p = sub.add_parser("aerq", parents=[common], help="averaged extreme quantile by all routes")
    p.add_argument("--input", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the identities on data or a generated corpus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--generate", type=int, metavar="N")
    p.add_argument("--n", type=_range, default=(8, 60), help="size or LO:HI range")
    p.add_argument("--p", type=_range, default=(1, 5), help="dimension or LO:HI range")
    p.add_argument("--dist", default="mixed", help="normal | t(df) | pareto(tail) | mixed")
    p.add_argument("--hetero-frac", type=float, default=0.5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic dataset as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--dist", default="normal")
    p.add_argument("--beta", default=None, help="comma-separated beta0,beta1,..,betap")
    p.add_argument("--hetero", type=float, default=0.0)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--output", default="-")
    return parser


def _emit(records: Sequence[dict[str, Any]], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        for rec in records:
            out.write(json.dumps(rec) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    keys = list(records[0])
    writer.writerow(keys)
    for rec in records:
        writer.writerow(
            [";".join(map(str, v)) if isinstance(v, list) else ("" if v is None else v)
             for v in (rec.get(k) for k in keys)]
        )


def _tolerances(args: argparse.Namespace) -> Tolerances:
    return replace(DEFAULT_TOLERANCES, route=args.tol)


def _cmd_fit(args: argparse.Namespace, out: TextIO) -> int:
    data = load_csv(args.input)
    fit = fit_quantile(data, args.alpha, _tolerances(args))
    rec = {
        "alpha": fit.alpha,
        "beta0": fit.beta0,
        "slopes": [float(v) for v in fit.slopes],
        "objective": fit.objective,
        "averaged": averaged_rq(fit, data),
        "active_set": [i + 1 for i in fit.active_set],
        "degenerate": fit.degenerate,
    }
    if args.format == "csv":
        rec = {"alpha": rec["alpha"], "beta0": rec["beta0"],
               **{f"x{j + 1}": v for j, v in enumerate(rec["slopes"])},
               "objective": rec["objective"], "averaged": rec["averaged"]}
    _emit([rec], args.format, out)
    return EXIT_OK


def _cmd_rankscores(args: argparse.Namespace, out: TextIO) -> int:
    data = load_csv(args.input)
    sol = solve_rank_scores(data, args.alpha, tol=_tolerances(args))
    if args.format == "csv":
        _emit([{"index": i + 1, "score": float(s)} for i, s in enumerate(sol.scores)], "csv", out)
    else:
        _emit([{
            "alpha": sol.alpha,
            "scores": [float(s) for s in sol.scores],
            "dual_objective": sol.dual_objective,
            "constraint_residual": dual_constraint_residual(data, sol),
        }], "json", out)
    return EXIT_OK


def _report_record(report, instance: int) -> dict[str, Any]:
    return {"instance": instance, **report.to_dict()}


def _cmd_aerq(args: argparse.Namespace, out: TextIO) -> int:
    data = load_csv(args.input, allow_exact=True)
    report = verify_identities(data, _tolerances(args))
    _emit([_report_record(report, 0)], args.format, out)
    return EXIT_FAIL if report.verdict == FAIL else EXIT_OK


def _verify_generated(job: tuple[int, int, GeneratorSpec, Tolerances]) -> dict[str, Any]:
    seed, index, spec, tol = job
    sample = simulate(spec, seed, index)
    report = safe_verify(sample.data, tol)
    rec = _report_record(report, index)
    # generator truth: B must not exceed max error + beta0 + xbar' beta
    truth = float(sample.errors.max() + sample.beta[0] + sample.data.x_mean @ sample.beta[1:])
    if report.verdict == PASS and not report.b_primal <= truth + 1e-9:
        rec["verdict"] = FAIL
        rec["notes"] = rec["notes"] + ["B exceeds the error-maximum bound"]
    return rec


def _cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    tol = _tolerances(args)
    if args.input is not None:
        records = [_report_record(safe_verify(load_csv(args.input, allow_exact=True), tol), 0)]
    else:
        if args.generate < 0:
            raise InputError("--generate must be nonnegative")
        laws = MIXED_LAWS if args.dist.strip().lower() == "mixed" else (parse_error_law(args.dist),)
        specs = corpus_specs(args.seed, args.generate, args.n, args.p, laws, args.hetero_frac)
        jobs = [(args.seed, k, spec, tol) for k, spec in enumerate(specs)]
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                records = list(pool.map(_verify_generated, jobs, chunksize=16))
        else:
            records = [_verify_generated(j) for j in jobs]

    counts = {v: sum(r["verdict"] == v for r in records) for v in (PASS, FAIL, SKIPPED)}
    if records:
        _emit(records, args.format, out)
    if args.format == "json":
        out.write(json.dumps({
            "summary": True, "total": len(records), "pass": counts[PASS],
            "fail": counts[FAIL], "skip": counts[SKIPPED],
        }) + "\n")
    return EXIT_FAIL if counts[FAIL] else EXIT_OK


def _cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    beta = None
    if args.beta is not None:
        try:
            beta = tuple(float(v) for v in args.beta.split(","))
        except ValueError:
            raise InputError(f"bad --beta {args.beta!r}") from None
    spec = GeneratorSpec(args.n, args.p, parse_error_law(args.dist), args.hetero, beta)
    sample = simulate(spec, args.seed)
    if args.output == "-":
        write_csv(sample.data, out)
    else:
        write_csv(sample.data, args.output)
    return EXIT_OK


COMMANDS = {
    "fit": _cmd_fit,
    "rankscores": _cmd_rankscores,
    "aerq": _cmd_aerq,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args, out)
    except (DatasetError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AerqError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
