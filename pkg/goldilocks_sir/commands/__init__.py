"""Subcommands of the goldilocks-sir CLI. Each module exposes register()."""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

from goldilocks_sir.dynamics import (
    DimensionalParams,
    IntegrationOptions,
    nondimensionalize,
)

Subparsers = argparse._SubParsersAction  # noqa: SLF001
HelpFormatter = argparse.ArgumentDefaultsHelpFormatter


def add_parser(
    subparsers: "Subparsers[argparse.ArgumentParser]",
    name: str,
    help_text: str,
    aliases: Sequence[str] = (),
) -> argparse.ArgumentParser:
    return subparsers.add_parser(
        name,
        aliases=list(aliases),
        help=help_text,
        description=help_text,
        formatter_class=HelpFormatter,
    )


def add_integration_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("integration")
    group.add_argument("--rel-tol", type=float, default=1e-9, help="relative tol")
    group.add_argument("--abs-tol", type=float, default=1e-12, help="absolute tol")
    group.add_argument(
        "--sample-step", type=float, default=0.05, help="output spacing in tau"
    )
    group.add_argument(
        "--i-qss-threshold",
        type=float,
        default=1e-6,
        help="infected fraction below which the epidemic counts as settled",
    )
    group.add_argument(
        "--qss-multiplier",
        type=float,
        default=5.0,
        help="QSS time as a multiple of the peak time",
    )


def integration_options(args: argparse.Namespace) -> IntegrationOptions:
    return IntegrationOptions(
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        sample_step=args.sample_step,
        i_qss_threshold=args.i_qss_threshold,
        qss_multiplier=args.qss_multiplier,
    )


def add_gamma_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="recovery rate per day; when given, times are read in days",
    )


def to_tau(args: argparse.Namespace, r0: float, t: float) -> float:
    """A CLI time in tau units, converting from days when --gamma is set."""
    if args.gamma is None:
        return t
    params = DimensionalParams(beta=r0 * args.gamma, gamma=args.gamma)
    return nondimensionalize(params, t)[1]


def emit(text: str, output: Path | None = None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
