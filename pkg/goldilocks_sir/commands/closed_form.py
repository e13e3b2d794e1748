import argparse

from goldilocks_sir.commands import Subparsers, add_parser, emit
from goldilocks_sir.final_size import (
    FinalSizeQuery,
    final_size,
    final_size_optimum,
    herd_immunity_threshold,
)


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(
        subparsers, "final-size", "closed-form final susceptible fraction"
    )
    parser.add_argument("--r", type=float, required=True, help="reproduction number")
    parser.add_argument("--s0", type=float, required=True, help="susceptible fraction")
    parser.add_argument("--i0", type=float, default=0.0, help="infected fraction")
    parser.add_argument(
        "--delta",
        type=float,
        default=None,
        help="also report the best final size over states with i >= delta",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    query = FinalSizeQuery(r=args.r, s0=args.s0, i0=args.i0)
    lines = [
        f"s_infinity={final_size(query):.10g}",
        f"s_star={herd_immunity_threshold(args.r):.10g}",
    ]
    if args.delta is not None:
        best = final_size_optimum(args.r, args.delta)
        lines += [
            f"s_op={best.s_op:.10g}",
            f"i_op={best.i_op:.10g}",
            f"s_inf_op={best.s_inf_op:.10g}",
        ]
    emit("\n".join(lines) + "\n")
    return 0
