import argparse
import logging
from pathlib import Path

from goldilocks_sir.commands import (
    Subparsers,
    add_gamma_arg,
    add_integration_args,
    add_parser,
    emit,
    integration_options,
    to_tau,
)
from goldilocks_sir.dynamics import (
    DEFAULT_EPSILON,
    EpiState,
    ReproductionSchedule,
    integrate,
)
from goldilocks_sir.errors import InvalidStateError
from goldilocks_sir.schemas import TrajectoryDocument

logger = logging.getLogger(__name__)


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(
        subparsers, "simulate", "integrate the SIR model and export the trajectory"
    )
    parser.add_argument("--r0", type=float, required=True, help="baseline R")
    parser.add_argument(
        "--eps", type=float, default=DEFAULT_EPSILON, help="initial infected fraction"
    )
    parser.add_argument("--tau-end", type=float, default=100.0, help="horizon")
    parser.add_argument("--tau-s", type=float, default=None, help="distancing start")
    parser.add_argument("--tau-f", type=float, default=None, help="distancing end")
    parser.add_argument("--r-s", type=float, default=None, help="distancing R")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument(
        "--output", type=Path, default=None, help="file to write (default: stdout)"
    )
    add_gamma_arg(parser)
    add_integration_args(parser)
    parser.set_defaults(handler=run)


def _schedule(args: argparse.Namespace) -> ReproductionSchedule:
    window = (args.tau_s, args.tau_f, args.r_s)
    if all(value is None for value in window):
        return ReproductionSchedule.constant(args.r0)
    if any(value is None for value in window):
        msg = "--tau-s, --tau-f and --r-s must be given together"
        raise InvalidStateError(msg)
    return ReproductionSchedule.single_interval(
        args.r0,
        args.r_s,
        to_tau(args, args.r0, args.tau_s),
        to_tau(args, args.r0, args.tau_f),
    )


def run(args: argparse.Namespace) -> int:
    traj = integrate(
        EpiState.outbreak(args.eps),
        _schedule(args),
        to_tau(args, args.r0, args.tau_end),
        integration_options(args),
    )
    logger.info("integrated %d samples, %d peak(s)", len(traj), len(traj.peaks))
    if args.format == "json":
        text = TrajectoryDocument.from_trajectory(traj).model_dump_json(indent=2)
        emit(text + "\n", args.output)
    else:
        emit(traj.to_csv(), args.output)
    return 0
