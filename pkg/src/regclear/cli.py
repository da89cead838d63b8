"""Command line: ``clear``, ``trials``, ``gen-fleet`` and ``stats``."""

from __future__ import annotations

import argparse
import sys

from .files import CaseFileError, read_case, read_results, write_case, write_results
from .harness import (
    SERIES,
    TooManyInfeasibleTrials,
    TrialSpec,
    simulate,
    summarize,
    synthetic_case,
)
from .isone import clear_isone
from .miso import clear_miso
from .model import MarketInfeasibleError, validate_case
from .pjm import clear_pjm

EXIT_INVALID = 1
EXIT_INFEASIBLE = 2

MARKETS = {
    "isone": ("ISO New England", clear_isone),
    "pjm": ("PJM Interconnection", clear_pjm),
    "miso": ("Midcontinent ISO", clear_miso),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def format_clearing(result, case) -> str:
    title = MARKETS[result.market][0]
    ids = case.ids
    width = max(8, *(len(i) + 2 for i in ids))
    if result.market == "miso":
        prices = f"mu = {result.price_total:.2f} $/MWh"
    else:
        prices = f"mu_cap = {result.price_capacity:.2f} $/MWh"
    head = f"gamma = {result.lmp:.2f} $/MWh   {prices}   mu_per = {result.price_performance:.2f} $/MWh"
    mileage_label = "R_per (MW)" if result.market == "isone" else "R_per* (MW)"

    def row(label, values):
        return f"{label:<12}" + "".join(f"{values[i]:>{width}.2f}" for i in ids)

    lines = [
        title,
        head,
        " " * 12 + "".join(f"{i:>{width}}" for i in ids),
        row("P (MW)", result.energy),
        row("R_cap (MW)", result.reg_capacity),
        row(mileage_label, result.reg_mileage),
    ]
    return "\n".join(lines) + "\n"


def format_stats(stats) -> str:
    lines = [f"{'series':<16}{'minimum':>12}{'mean':>12}{'maximum':>12}{'variance':>12}"]
    for name in SERIES:
        if name in stats:
            s = stats[name]
            lines.append(f"{name:<16}{s.min:>12.4f}{s.mean:>12.4f}{s.max:>12.4f}{s.variance:>12.4f}")
    return "\n".join(lines) + "\n"


def _load_valid_case(path):
    try:
        case = read_case(path)
    except (OSError, CaseFileError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None
    problems = validate_case(case)
    if problems:
        for p in problems:
            print(f"invalid case: {p}", file=sys.stderr)
        return None
    return case


def cmd_clear(args):
    case = _load_valid_case(args.case)
    if case is None:
        return EXIT_INVALID
    if args.forecast_demand is not None:
        if args.forecast_demand <= 0:
            print("error: --forecast-demand must be positive", file=sys.stderr)
            return EXIT_INVALID
        case = case.with_forecast(args.forecast_demand)
    try:
        result = MARKETS[args.market][1](case)
    except MarketInfeasibleError as exc:
        print(f"market infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    sys.stdout.write(format_clearing(result, case))
    return 0


def cmd_trials(args):
    case = _load_valid_case(args.case)
    if case is None:
        return EXIT_INVALID
    try:
        spec = TrialSpec(case, args.scale_min, args.scale_max, args.seed, args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rows, failures = simulate(spec)
    except TooManyInfeasibleTrials as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        write_results(rows, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for f in failures:
        print(f"warning: {f}", file=sys.stderr)
    sys.stdout.write(format_stats(summarize(rows)))
    return 0


def cmd_gen_fleet(args, parser):
    if args.n < 5:
        parser.print_usage(sys.stderr)
        print(f"error: --n must be at least 5, got {args.n}", file=sys.stderr)
        return EXIT_INVALID
    case = synthetic_case(args.n, args.seed)
    try:
        write_case(case, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


def cmd_stats(args):
    try:
        rows = read_results(args.csv)
    except (OSError, ValueError) as exc:
        print(f"error: {args.csv}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(format_stats(summarize(rows)))
    return 0


def build_parser():
    parser = _Parser(prog="regclear", description="RTO frequency regulation market clearing")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("clear", help="clear one market and print dispatch and prices")
    p.add_argument("--market", required=True, choices=sorted(MARKETS))
    p.add_argument("--case", required=True)
    p.add_argument("--forecast-demand", type=float, default=None)

    p = sub.add_parser("trials", help="forecast-error Monte Carlo across all markets")
    p.add_argument("--case", required=True)
    p.add_argument("--n", type=int, default=8760)
    p.add_argument("--scale-min", type=float, default=0.5)
    p.add_argument("--scale-max", type=float, default=1.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-fleet", help="write a seeded synthetic case file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    gen_parser = p

    p = sub.add_parser("stats", help="summarise a trials results file")
    p.add_argument("csv")
    return parser, gen_parser


def main(argv=None):
    parser, gen_parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "clear":
        return cmd_clear(args)
    if args.command == "trials":
        return cmd_trials(args)
    if args.command == "gen-fleet":
        return cmd_gen_fleet(args, gen_parser)
    return cmd_stats(args)


if __name__ == "__main__":
    sys.exit(main())
