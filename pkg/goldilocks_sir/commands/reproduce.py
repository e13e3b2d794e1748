import argparse
import json

from goldilocks_sir.commands import Subparsers, add_parser, emit
from goldilocks_sir.runner import format_comparison, reproduce_reference_runs

EXIT_MISMATCH = 2


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(
        subparsers,
        "reproduce",
        "rerun the reference scenarios and compare with the published values",
        aliases=["reproduce-paper"],
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    rows = reproduce_reference_runs(args.jobs)
    if args.format == "json":
        payload = [row.model_dump(mode="json") for row in rows]
        emit(json.dumps(payload, indent=2) + "\n")
    else:
        emit(format_comparison(rows))
    return 0 if all(row.passed for row in rows) else EXIT_MISMATCH
