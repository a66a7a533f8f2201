"""Command-line front end.

Exit codes: 0 success, 1 a verification or comparison failed, 2 bad input.
Floats are written with 17 significant digits so CSV output round-trips.
Set ``SOURCE_DATE_EPOCH`` to pin the metadata timestamp.
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__, streams
from .coefficients import BetaMultiset, big_C, little_c
from .errors import InvalidInputError, RandIntegralError, UnsupportedError
from .integral_engine import IntegralSpec, cf_compare, empirical_cf, logcf_quadrature, simulate_integral
from .levy_core import BallComplement, decompose, measure_eval, transform_multi
from .product_law import build_law, sample
from .triple_io import load_triple, triple_to_dict
from .verify import SUITE_NAMES, DECOMPOSITION_RADII, run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

CHECK_TOL = 1e-10
MIN_PATHS = 1000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- formatting -----------------------------------------------------------------

def fmt(value):
    """Scalar to a JSON-safe value; rationals become ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else int(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        return value
    value = float(value)
    return value if math.isfinite(value) else str(value)


def cell(value) -> str:
    if value is None:
        return ""
    value = fmt(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def metadata(args, **extra) -> dict:
    meta = {"command": args.command, "version": __version__, "seed": getattr(args, "seed", None),
            "mode": args.mode}
    meta.update(extra)
    meta["timestamp"] = timestamp()
    return meta


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def render_csv(meta: dict, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={cell(v) if v is not None else 'none'}" for k, v in meta.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell(v) for v in row])
    return buf.getvalue()


def emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = streams.fresh_seed()
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def parse_multiset(text: str, mode: str) -> BetaMultiset:
    return BetaMultiset.parse(text, mode="float" if mode == "float" else None)


def linspace_arg(spec, what: str) -> np.ndarray:
    lo, hi, n = spec
    if n < 2:
        raise UsageError(f"{what} needs at least 2 points")
    if not hi > lo:
        raise UsageError(f"{what} bounds must be strictly increasing")
    return np.linspace(lo, hi, n)


# -- commands -------------------------------------------------------------------

def cmd_coeffs(args) -> int:
    values = []
    for token in args.betas:
        values.extend(parse_multiset(token, args.mode).expanded())
    mode = "exact" if args.mode == "exact" else "float"
    C = big_C(values, mode=mode)
    c = little_c(values, mode=mode)
    if args.format == "csv":
        meta = metadata(args, sum_C=C.total())
        rows = [[b, cj, lj] for b, cj, lj in zip(C.exponents, C.values, c.values)]
        emit(args, render_csv(meta, ["beta", "C", "c"], rows))
        return EXIT_OK
    doc = {"metadata": metadata(args), "betas": [fmt(b) for b in C.exponents], "C": [fmt(v) for v in C.values],
           "c": [fmt(v) for v in c.values], "sum_C": fmt(C.total())}
    emit(args, render_json(doc))
    return EXIT_OK


def cmd_law(args) -> int:
    multiset = parse_multiset(args.multiset, args.mode)
    law = build_law(multiset)
    if args.sample is not None:
        if args.sample < 1:
            raise UsageError("--sample needs a positive count")
        seed = resolve_seed(args)
        batch = sample(multiset, args.sample, seed)
        meta = metadata(args, multiset=str(multiset), n=args.sample)
        if args.format == "csv":
            emit(args, render_csv(meta, ["value"], [[v] for v in batch.values]))
            return EXIT_OK
        emit(args, render_json({"metadata": meta, "samples": [fmt(v) for v in batch.values]}))
        return EXIT_OK
    if args.eval:
        t = np.array(args.eval, dtype=float)
    else:
        t = linspace_arg(args.grid or (0.1, 1.0, 10), "--grid")
    inside = (t > 0) & (t <= 1)
    dens = np.full(t.shape, np.nan)
    dens[inside] = law.pdf(t[inside])
    dens[(t < 0) | (t > 1)] = 0.0
    F = law.cdf(t)
    meta = metadata(args, multiset=str(multiset))
    if args.format == "csv":
        rows = [[tk, None if math.isnan(fk) else fk, Fk] for tk, fk, Fk in zip(t, dens, F)]
        emit(args, render_csv(meta, ["t", "pdf", "cdf"], rows))
        return EXIT_OK
    doc = {
        "metadata": meta,
        "terms": [{"coef": fmt(c), "exponent": fmt(e), "logpow": j} for c, e, j in law.terms],
        "table": [{"t": fmt(tk), "pdf": None if math.isnan(fk) else fmt(fk), "cdf": fmt(Fk)}
                  for tk, fk, Fk in zip(t, dens, F)],
    }
    emit(args, render_json(doc))
    return EXIT_OK


def _decomposition_residual(triple, multiset, radii) -> float:
    if not multiset.is_distinct:
        raise UsageError("--check needs distinct exponents")
    direct = transform_multi(triple, multiset)
    split = decompose(triple, list(multiset.values))
    gaps = [float(np.abs(direct.shift - split.shift).max()),
            float(np.abs(direct.covariance - split.covariance).max())]
    for rad in radii:
        region = BallComplement(float(rad))
        gaps.append(abs(measure_eval(direct.measure, region) - split.measure_eval(region)))
    return max(gaps)


def cmd_transform(args) -> int:
    triple = load_triple(args.triple)
    multiset = parse_multiset(args.betas, args.mode)
    out = transform_multi(triple, multiset)
    radii = args.radii or [1.0]
    masses = [(r, measure_eval(out.measure, BallComplement(r))) for r in radii]
    check = None
    status = EXIT_OK
    if args.check:
        residual = _decomposition_residual(triple, multiset, sorted(set(radii) | set(DECOMPOSITION_RADII)))
        check = {"residual": fmt(residual), "tolerance": CHECK_TOL, "passed": residual <= CHECK_TOL}
        status = EXIT_OK if check["passed"] else EXIT_FAILED
    meta = metadata(args, multiset=str(multiset))
    if args.format == "csv":
        rows = [[f"shift[{i}]", v] for i, v in enumerate(out.shift)]
        rows += [[f"covariance[{i}][{j}]", out.covariance[i, j]]
                 for i in range(out.dim) for j in range(out.dim)]
        rows += [[f"mass(|x|>{cell(r)})", m] for r, m in masses]
        if check:
            rows.append(["check_residual", check["residual"]])
        emit(args, render_csv(meta, ["quantity", "value"], rows))
        return status
    doc = {"metadata": meta, "triple": triple_to_dict(out),
           "masses": [{"radius": fmt(r), "mass": fmt(m)} for r, m in masses], "check": check}
    emit(args, render_json(doc))
    return status


def cmd_verify(args) -> int:
    seed = resolve_seed(args)
    options = {"samples": args.samples} if args.samples is not None else {}
    results = run_suite(args.suite, seed, **options)
    passed = all(r.passed for r in results if not r.informational)
    meta = metadata(args, suite=args.suite)
    if args.format == "csv":
        rows = [[r.name, r.passed, r.residual, r.tolerance, r.informational, r.detail] for r in results]
        emit(args, render_csv(meta, ["check", "passed", "residual", "tolerance", "informational", "detail"], rows))
    else:
        checks = [{k: fmt(v) if isinstance(v, (float, bool)) else v for k, v in r.as_dict().items()}
                  for r in results]
        emit(args, render_json({"metadata": meta, "checks": checks, "passed": passed}))
    for r in results:
        if not r.passed:
            print(f"FAILED {r.name}: residual {r.residual:.3g} > {r.tolerance:.3g}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_simulate(args) -> int:
    triple = load_triple(args.triple)
    multiset = parse_multiset(args.betas, args.mode)
    if args.paths < MIN_PATHS:
        raise UsageError(f"--paths must be at least {MIN_PATHS}")
    scales = linspace_arg(args.y_grid, "--y-grid")
    direction = np.zeros(triple.dim)
    direction[0] = 1.0
    if args.direction is not None:
        direction = np.array(args.direction, dtype=float)
        if direction.size != triple.dim:
            raise UsageError(f"--direction needs {triple.dim} components")
    y = scales[:, None] * direction[None, :]
    seed = resolve_seed(args)
    spec = IntegralSpec.canonical(multiset)
    sim = simulate_integral(triple, spec, args.paths, args.grid, seed)
    if args.samples_out:
        with open(args.samples_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(metadata(args, multiset=str(multiset)),
                                [f"x{i}" for i in range(triple.dim)], sim.samples.tolist()))
    emp = empirical_cf(sim.samples, y, seed)
    report = cf_compare(emp, logcf_quadrature(triple, spec, y), z=args.z)
    meta = metadata(args, multiset=str(multiset), paths=args.paths, grid=args.grid, z=args.z,
                    truncated_mass=sim.truncated_mass)
    status = EXIT_OK if report.passed else EXIT_FAILED
    if args.format == "csv":
        rows = [[s, e.real, e.imag, se, a.real, a.imag, dv, not fl]
                for s, e, se, a, dv, fl in zip(scales, report.estimates, report.standard_errors,
                                               report.analytic, report.deviations, report.flags)]
        emit(args, render_csv(meta, ["y", "estimate_re", "estimate_im", "standard_error",
                                     "analytic_re", "analytic_im", "deviation", "pass"], rows))
        return status
    points = [{"y": [fmt(v) for v in yk], "estimate": [fmt(e.real), fmt(e.imag)], "standard_error": fmt(se),
               "analytic": [fmt(a.real), fmt(a.imag)], "deviation": fmt(dv), "pass": not bool(fl)}
              for yk, e, se, a, dv, fl in zip(y, report.estimates, report.standard_errors,
                                              report.analytic, report.deviations, report.flags)]
    doc = {"metadata": meta, "mean": [fmt(v) for v in sim.mean()],
           "mean_standard_error": [fmt(v) for v in sim.mean_standard_error()],
           "points": points, "max_deviation": fmt(report.max_deviation), "passed": report.passed}
    emit(args, render_json(doc))
    return status


# -- parser -----------------------------------------------------------------------

def seed_type(text: str) -> int:
    try:
        return streams.check_seed(int(text))
    except (ValueError, RandIntegralError):
        raise argparse.ArgumentTypeError(f"seed must be an integer in [0, 2**64), got {text!r}") from None


def add_global_flags(parser, suppress: bool) -> None:
    # on subcommands the defaults are suppressed so a flag given before the
    # subcommand name is not overwritten
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--output", metavar="PATH", default=default(None),
                        help="write to PATH instead of standard output")
    parser.add_argument("--format", choices=("json", "csv"), default=default("json"),
                        help="output format (default json)")
    parser.add_argument("--seed", type=seed_type, default=default(None),
                        help="64-bit seed; generated and printed when omitted")
    parser.add_argument("--mode", choices=("float", "exact"), default=default("float"),
                        help="exact keeps rational exponents and coefficients as fractions")


def build_parser(width: int | None = None) -> argparse.ArgumentParser:
    """``width`` pins the help text width (the manual generator uses it)."""
    formatter = functools.partial(argparse.HelpFormatter, width=width) if width else argparse.HelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    add_global_flags(common, suppress=True)

    parser = _Parser(prog="randintegral", formatter_class=formatter,
                     description="Product-of-uniform time changes, transformed Levy triples and their checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND", parser_class=_Parser)

    def command(name, **kwargs):
        return sub.add_parser(name, parents=[common], formatter_class=formatter, **kwargs)

    p = command("coeffs", help="C and c coefficients of distinct exponents",
                description="Print C_j = prod_{k!=j} b_k/(b_k-b_j), c_j = prod_{k!=j} 1/(b_k-b_j) "
                            "and the sum of the C_j.")
    p.add_argument("betas", nargs="+", help="distinct positive exponents, separately or comma-joined")
    p.set_defaults(func=cmd_coeffs)

    p = command("law", help="pdf/cdf table or samples of a product of uniform powers",
                description="Law of U_1**(1/b_1) * ... * U_K**(1/b_K). MULTISET is '1,2,3' or '2x3' "
                            "(value x multiplicity), items may be mixed: '1,2x3'.")
    p.add_argument("multiset")
    p.add_argument("--eval", type=float, action="append", metavar="T", help="evaluate at T (repeatable)")
    p.add_argument("--grid", type=float, nargs=3, metavar=("LO", "HI", "N"),
                   help="evaluate on N evenly spaced points (default 0.1 1 10)")
    p.add_argument("--sample", type=int, metavar="N", help="emit N samples instead of a table")
    p.set_defaults(func=cmd_law)

    p = command("transform", help="triple of the image law under J^A",
                description="Transform a triple file (JSON, see docs/cli.md) by the multiset A.")
    p.add_argument("triple", help="triple JSON file")
    p.add_argument("--betas", required=True, metavar="MULTISET", help="exponent multiset A")
    p.add_argument("--radii", type=float, action="append", metavar="R",
                   help="report the mass of {|x| > R} (repeatable, default 1)")
    p.add_argument("--check", action="store_true",
                   help="compare with the signed sum of single-exponent transforms (distinct A only)")
    p.set_defaults(func=cmd_transform)

    p = command("verify", help="run verification suites",
                description="Run identity, law, Monte Carlo, triple and composition checks.")
    p.add_argument("--suite", choices=SUITE_NAMES, default="identities")
    p.add_argument("--samples", type=int, metavar="N", help="sample size for the Monte Carlo suite (default 1e6)")
    p.set_defaults(func=cmd_verify)

    p = command("simulate", help="simulate J^A(nu) and compare characteristic functions",
                description="Simulate int t dY(r_A(t)) and compare its empirical characteristic "
                            "function with the quadrature value.")
    p.add_argument("triple", help="triple JSON file")
    p.add_argument("--betas", required=True, metavar="MULTISET", help="exponent multiset A")
    p.add_argument("--paths", type=int, default=100_000, help=f"number of paths, at least {MIN_PATHS}")
    p.add_argument("--grid", type=int, default=512, help="time grid size, at least 64")
    p.add_argument("--y-grid", type=float, nargs=3, metavar=("LO", "HI", "N"), default=(-3.0, 3.0, 21),
                   help="scalar multiples of the direction (default -3 3 21)")
    p.add_argument("--direction", type=float, nargs="+", metavar="V", help="direction of the y grid (default e1)")
    p.add_argument("--z", type=float, default=4.0, help="standardized deviation threshold")
    p.add_argument("--samples-out", metavar="PATH", help="also write the raw samples as CSV")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "grid") and isinstance(args.grid, list):
        lo, hi, n = args.grid
        if n != int(n):
            parser.error("--grid N must be an integer")
        args.grid = (lo, hi, int(n))
    if hasattr(args, "y_grid") and args.y_grid is not None:
        lo, hi, n = args.y_grid
        if n != int(n):
            parser.error("--y-grid N must be an integer")
        args.y_grid = (lo, hi, int(n))
    try:
        return args.func(args)
    except (UsageError, InvalidInputError, UnsupportedError) as exc:
        print(f"randintegral {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RandIntegralError as exc:
        print(f"randintegral {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILED
