"""
Command-line interface for soficlab.
"""

import argparse
import logging
import sys
from pathlib import Path

from soficlab.config import (
    ExperimentConfig,
    GraphOfGroupsConfig,
    NormalFormConfig,
    VerifyConfig,
    load_config,
)
from soficlab.errors import SoficLabError
from soficlab.report import (
    emit_csv,
    emit_json,
    run_ballgroup,
    run_bench,
    run_build,
    run_gog,
    run_nf,
    run_verify,
)

CONFIG_MODELS = {
    "verify": VerifyConfig,
    "build": ExperimentConfig,
    "bench": ExperimentConfig,
    "nf": NormalFormConfig,
    "gog": GraphOfGroupsConfig,
}


def _shared_flags(suppress: bool) -> argparse.ArgumentParser:
    """
    Flags accepted both before and after the subcommand.

    The subcommand copies default to SUPPRESS so they never overwrite a
    value given before the subcommand.
    """
    def default(value):
        return argparse.SUPPRESS if suppress else value

    shared = argparse.ArgumentParser(add_help=False)

    shared.add_argument(
        "--config",
        type=str,
        default=default(None),
        help="Path to the JSON configuration of the subcommand"
    )

    shared.add_argument(
        "--out",
        type=str,
        default=default(None),
        help="Output file (defaults to stdout for JSON)"
    )

    shared.add_argument(
        "--seed",
        type=int,
        default=default(None),
        help="Override the configuration seed"
    )

    shared.add_argument(
        "--threads",
        type=int,
        default=default(None),
        help="Worker threads for measuring coordinates"
    )

    shared.add_argument(
        "--format",
        choices=("json", "csv"),
        default=default("json"),
        help="Report format (default: json). csv needs --out"
    )

    shared.add_argument(
        "-v", "--verbose",
        action="store_true",
        default=default(False),
        help="Log at DEBUG level"
    )
    return shared


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soficlab",
        description="Build and verify sofic quasi-actions of graph products",
        parents=[_shared_flags(suppress=False)],
        epilog="Shared flags may come before or after the subcommand, e.g. "
               "soficlab build --config cfg.json --out report.json"
    )

    shared = _shared_flags(suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    sub.add_parser("verify", parents=[shared], help="Check one quasi-action table against conditions (a)-(d)")
    sub.add_parser("build", parents=[shared], help="Build the graph-product quasi-action and measure it")
    sub.add_parser("nf", parents=[shared], help="Normal forms, k-normal forms and merger counts of graph-product words")
    sub.add_parser("gog", parents=[shared], help="Fundamental-group presentation of a graph of groups")

    ballgroup = sub.add_parser("ballgroup", parents=[shared], help="Check that the free-ball group has no short relators")
    ballgroup.add_argument("--gens", type=int, required=True, help="Number of generators s")
    ballgroup.add_argument("--radius", type=int, required=True, help="Ball radius R")
    ballgroup.add_argument("--exhaustive", action="store_true", default=None,
                           help="Check every word of length <= R (default for s <= 2, R <= 4)")
    ballgroup.add_argument("--samples", type=int, help="Random words checked when sampling")

    bench = sub.add_parser("bench", parents=[shared], help="Time repeated build runs")
    bench.add_argument("--repeat", type=int, default=3, help="Number of runs (default: 3)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # Validate arguments
    if args.command != "ballgroup" and not args.config:
        parser.error(f"{args.command} needs --config")
    if args.format == "csv" and not args.out:
        parser.error("--format csv needs --out")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "ballgroup":
            report = run_ballgroup(args.gens, args.radius, args.seed or 0, args.exhaustive, args.samples)
        else:
            config = load_config(CONFIG_MODELS[args.command], args.config)
            if args.command == "verify":
                report = run_verify(config)
            elif args.command == "build":
                report = run_build(config, seed=args.seed, threads=args.threads)
            elif args.command == "bench":
                report = run_bench(config, repeat=args.repeat, seed=args.seed, threads=args.threads)
            elif args.command == "nf":
                report = run_nf(config)
            else:
                report = run_gog(config)

        if args.format == "csv":
            path = emit_csv(report, args.out)
            print(f"✓ Wrote {args.command} report: {path}")
        elif args.out:
            emit_json(report, args.out)
            print(f"✓ Wrote {args.command} report: {Path(args.out)}")
        else:
            sys.stdout.write(emit_json(report))

        if not report.passed:
            print(f"{args.command}: verdict failed", file=sys.stderr)
            sys.exit(1)
        print(f"✓ {args.command} passed", file=sys.stderr)
        if args.command == "gog" and "presentation" in report.body:
            print(f"  {report.body['presentation']}", file=sys.stderr)

    except SoficLabError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(2)

    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
