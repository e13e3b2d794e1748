import argparse
from pathlib import Path

from goldilocks_sir.commands import (
    Subparsers,
    add_integration_args,
    add_parser,
    emit,
    integration_options,
)
from goldilocks_sir.dynamics import ReproductionSchedule
from goldilocks_sir.final_size import herd_immunity_threshold
from goldilocks_sir.stability import (
    DEFAULT_PORTRAIT_HORIZON,
    DEFAULT_PORTRAIT_STARTS,
    default_portrait_starts,
    final_size_level_set,
    level_curves_to_csv,
    lyapunov_level_set,
    phase_portrait,
    portrait_to_csv,
)


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(
        subparsers, "phase-portrait", "trajectories from the c = 0 edge, as CSV"
    )
    parser.add_argument("--r", type=float, default=2.5, help="reproduction number")
    parser.add_argument(
        "--starts", type=int, default=DEFAULT_PORTRAIT_STARTS, help="start points"
    )
    parser.add_argument(
        "--tau-end", type=float, default=DEFAULT_PORTRAIT_HORIZON, help="horizon"
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--output", type=Path, default=None, help="CSV file")
    add_integration_args(parser)
    parser.set_defaults(handler=run_portrait)

    parser = add_parser(
        subparsers, "level-curves", "level sets of the Lyapunov functions, as CSV"
    )
    parser.add_argument("--r", type=float, default=2.5, help="reproduction number")
    parser.add_argument(
        "--levels",
        type=float,
        nargs="+",
        default=[0.05, 0.1, 0.2],
        help="levels to trace",
    )
    parser.add_argument("--n", type=int, default=200, help="samples per curve")
    parser.add_argument(
        "--family",
        choices=("final-size", "lyapunov"),
        default="final-size",
        help="S* - S_inf(r, s, i) or the logarithmic Lyapunov function",
    )
    parser.add_argument(
        "--s-bar",
        type=float,
        default=None,
        help="equilibrium of the logarithmic family (default: S*)",
    )
    parser.add_argument("--output", type=Path, default=None, help="CSV file")
    parser.set_defaults(handler=run_level_curves)


def run_portrait(args: argparse.Namespace) -> int:
    trajectories = phase_portrait(
        ReproductionSchedule.constant(args.r),
        default_portrait_starts(args.starts),
        args.tau_end,
        integration_options(args),
        jobs=args.jobs,
    )
    emit(portrait_to_csv(trajectories), args.output)
    return 0


def run_level_curves(args: argparse.Namespace) -> int:
    if args.family == "final-size":
        curves = [final_size_level_set(args.r, level, args.n) for level in args.levels]
    else:
        s_bar = args.s_bar
        if s_bar is None:
            s_bar = herd_immunity_threshold(args.r)
        curves = [lyapunov_level_set(s_bar, level, args.n) for level in args.levels]
    emit(level_curves_to_csv(curves), args.output)
    return 0
