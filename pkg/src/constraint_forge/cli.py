"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from .algebra import ExpressionError, ScalarExpr
from .parser import parse_expr, to_text
from .report import DEFAULT_SEED, MUTATIONS, TARGETS, CliConfig, render, run_suite

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging():
    level = os.environ.get("CF_LOG", "warn").lower()
    logging.basicConfig(
        level=_LOG_LEVELS.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="constraint-forge",
        description="Exact verification of constrained dynamics on the sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification checks")
    verify.add_argument("target", nargs="?", default="all", choices=TARGETS)
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--grid", type=int, default=512)
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--order", type=int, default=6)
    verify.add_argument("--format", choices=("json", "md"), default="md")
    verify.add_argument("--out")
    verify.add_argument("--mutate", choices=MUTATIONS, help="inject a negative control")

    bracket = sub.add_parser("bracket", help="Poisson or Dirac bracket of two expressions")
    bracket.add_argument("left")
    bracket.add_argument("right")
    bracket.add_argument("--dirac", action="store_true")

    series = sub.add_parser("bft-series", help="terms of the q~ or pi~ expansion")
    series.add_argument("--field", choices=("q", "pi"), required=True)
    series.add_argument("--order", type=int, default=6)

    weyl = sub.add_parser("weyl", help="normal-ordered Weyl product and its eigenvalue")
    weyl.add_argument("--c", default="symbolic")

    spectrum = sub.add_parser("spectrum", help="exact energy table")
    spectrum.add_argument("--d", type=int, default=3)
    spectrum.add_argument("--lmax", type=int, default=5)
    spectrum.add_argument("--c", default="fixed")
    spectrum.add_argument("--format", choices=("json", "md"), default="md")

    report = sub.add_parser("report", help="full suite report")
    report.add_argument("--format", choices=("json", "md"), default="json")
    report.add_argument("--out")
    report.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def cmd_verify(args) -> int:
    cfg = CliConfig(
        command="verify",
        target=args.target,
        order=args.order,
        trials=args.trials,
        grid=args.grid,
        seed=args.seed,
        format=args.format,
        out=args.out,
        mutate=args.mutate,
    )
    reports, code = run_suite(cfg)
    _emit(render(reports, cfg.format), cfg.out)
    return code


def cmd_report(args) -> int:
    cfg = CliConfig(command="report", format=args.format, out=args.out, seed=args.seed)
    reports, code = run_suite(cfg)
    _emit(render(reports, cfg.format), cfg.out)
    return code


def cmd_bracket(args) -> int:
    from .brackets import dirac, poisson

    a, b = parse_expr(args.left), parse_expr(args.right)
    result = dirac(a, b) if args.dirac else poisson(a, b)
    print(to_text(result))
    return 0


def cmd_bft_series(args) -> int:
    from .algebra import PI_VEC, Q_VEC
    from .bft import BftConfig, iterate_field

    seed = Q_VEC if args.field == "q" else PI_VEC
    series = iterate_field(seed, BftConfig(order=args.order))
    for n, term in enumerate(series.terms):
        print(f"{args.field}^({n}) = {term}")
    return 0


def cmd_weyl(args) -> int:
    from .operators import apply_to_harmonic, build_weyl_product

    c = ScalarExpr.gen("c") if args.c == "symbolic" else ScalarExpr.const(_rational(args.c))
    product = build_weyl_product(c)
    print(f"Pi^N.Pi^N = {product}")
    print(f"eigenvalue on degree-l harmonics = {to_text(apply_to_harmonic(product))}")
    return 0


def cmd_spectrum(args) -> int:
    from .spectrum import fix_c, format_c, spectrum_table

    c_mode = "fixed" if args.c == "fixed" else _rational(args.c)
    rows = spectrum_table(args.d, args.lmax, c_mode)
    c2 = fix_c(args.d) if c_mode == "fixed" else c_mode**2
    if args.format == "json":
        data = {
            "d": args.d,
            "c_squared": str(c2),
            "rows": [
                {
                    "l": r.l,
                    "e_dirac": str(r.e_dirac),
                    "e_bft": str(r.e_bft),
                    "gap": None if r.gap is None else str(r.gap),
                }
                for r in rows
            ],
        }
        print(json.dumps(data, indent=2))
        return 0
    print(f"d = {args.d}, c^2 = {c2} (c = {format_c(c2)})")
    print()
    print("| l | E_dirac | E_bft | gap |")
    print("|---:|---:|---:|---:|")
    for r in rows:
        gap = "-" if r.gap is None else str(r.gap)
        print(f"| {r.l} | {r.e_dirac} | {r.e_bft} | {gap} |")
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "report": cmd_report,
    "bracket": cmd_bracket,
    "bft-series": cmd_bft_series,
    "weyl": cmd_weyl,
    "spectrum": cmd_spectrum,
}


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ExpressionError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
