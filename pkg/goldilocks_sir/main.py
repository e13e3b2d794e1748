import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from typing import NoReturn

from goldilocks_sir import __version__
from goldilocks_sir.commands import (
    HelpFormatter,
    closed_form,
    policy,
    reproduce,
    runs,
    simulate,
    stability,
)
from goldilocks_sir.config import load_environment
from goldilocks_sir.errors import NumericalError, ToolkitError

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code instead of argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="goldilocks-sir",
        description="Single-interval social distancing for the SIR model. "
        "Times are in units of the mean infectious period unless --gamma is set.",
        formatter_class=HelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG")
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in (simulate, closed_form, policy, stability, reproduce, runs):
        command.register(subparsers)
    return parser


def cli_dispatch(argv: Sequence[str] | None = None) -> int:
    """Run one CLI command: 0 on success, 1 on bad input, 2 on numerical failure."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    load_environment()
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except NumericalError as exc:
        logger.debug("numerical failure", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    except (ToolkitError, ValueError) as exc:
        # pydantic's ValidationError is a ValueError
        logger.debug("invalid input", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(cli_dispatch())
