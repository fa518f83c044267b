"""Command-line front end: solve / verify / scatter / all.

Exit codes: 0 all checks passed, 1 invariant failure, 2 input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    ConvergenceError,
    DomainError,
    ProblemFileError,
    StructuralError,
    TwoChanError,
)
from .harness import RunConfig, run
from .problem_io import load_problem
from .report import emit_tables, render_report, write_report

EXIT_PASS = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_STAGE_SETS = {
    "solve": ("solve",),
    "verify": ("solve", "verify"),
    "scatter": ("solve", "scatter"),
    "all": ("solve", "verify", "scatter"),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("problem", help="problem-definition YAML file")
    parser.add_argument("--tol", type=float, default=None,
                        help="fixed-point step tolerance (default 1e-12)")
    parser.add_argument("--max-iter", type=int, default=None,
                        help="iteration cap for the contraction map (default 200)")
    parser.add_argument("--delta", type=float, default=None,
                        help="ball radius for the contraction certificate (default 1)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed recorded in the report for replayability")
    parser.add_argument("--out", default=None, help="report file (default stdout)")
    parser.add_argument("--tables", default=None, metavar="DIR",
                        help="also emit plot-ready TSV tables into DIR")
    parser.add_argument("--dump-operators", action="store_true",
                        help="serialize W and X operators into the report")


def _parse_ladder(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse epsilon ladder {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("epsilon ladder is empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twochan",
        description=("Solve the two-channel operator Riccati equation, build "
                     "energy-independent effective Hamiltonians, and verify "
                     "their spectral and scattering structure."),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "run the Riccati fixed-point solver"),
        ("verify", "solve, then verify the structural theorems"),
        ("scatter", "solve, then run the on-shell scattering checks"),
        ("all", "run every stage"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        _add_common(cmd)
        if name in ("scatter", "all"):
            cmd.add_argument("--channel", type=int, choices=(1, 2), default=None,
                             help="restrict scattering to one channel")
            cmd.add_argument("--eps-ladder", type=_parse_ladder, default=None,
                             metavar="E1,E2,...",
                             help="decreasing imaginary shifts (default 0.1,0.03,0.01 "
                                  "times the band width)")
            cmd.add_argument("--onshell-tol", type=float, default=1e-3,
                             help="tolerance for unitarity/on-shell checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        parsed = load_problem(args.problem)
    except (ProblemFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    solver_defaults = parsed.solver
    try:
        config = RunConfig(
            problem_path=args.problem,
            stages=_STAGE_SETS[args.command],
            tol=args.tol if args.tol is not None else solver_defaults.get("tol", 1e-12),
            max_iter=(args.max_iter if args.max_iter is not None
                      else solver_defaults.get("max_iter", 200)),
            delta=(args.delta if args.delta is not None
                   else solver_defaults.get("delta", 1.0)),
            seed=args.seed,
            eps_ladder=getattr(args, "eps_ladder", None),
            onshell_tol=getattr(args, "onshell_tol", 1e-3),
            channel=getattr(args, "channel", None),
            dump_operators=args.dump_operators,
        )
    except (StructuralError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        report = run(parsed, config)
    except (StructuralError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TwoChanError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if args.out:
        write_report(report.mapping, args.out)
    else:
        print(render_report(report.mapping), end="")
    if args.tables:
        try:
            emit_tables(report.mapping, args.tables)
        except TwoChanError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT

    if report.errors:
        for err in report.errors:
            print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    if report.failures:
        for failure in report.failures:
            print(f"check failed: {failure}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
