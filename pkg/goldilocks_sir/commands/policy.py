import argparse
import json
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
from goldilocks_sir.config import load_config
from goldilocks_sir.deps import session_scope
from goldilocks_sir.dynamics import (
    DEFAULT_EPSILON,
    DimensionalParams,
    EpiState,
    dimensionalize,
)
from goldilocks_sir.errors import PreconditionViolation
from goldilocks_sir.intervention import (
    DEFAULT_QSS_BAND,
    DEFAULT_R_MIN,
    DEFAULT_RELEASE_HORIZON,
    GOLDILOCKS_TOL,
    MIN_QSS_MULTIPLIER,
    ScenarioReport,
    SingleIntervalPolicy,
    classify_scenario,
    goldilocks_r,
    goldilocks_scan,
    quasi_optimal_policy,
)
from goldilocks_sir.runner import evaluate, record_run, run_scenario
from goldilocks_sir.storage import get_artifact_store

logger = logging.getLogger(__name__)


def _add_outbreak_args(parser: argparse.ArgumentParser, *, required: bool) -> None:
    parser.add_argument("--r0", type=float, required=required, help="baseline R")
    parser.add_argument(
        "--eps", type=float, default=DEFAULT_EPSILON, help="initial infected fraction"
    )
    parser.add_argument(
        "--tau-s", type=float, required=required, help="distancing start"
    )
    parser.add_argument(
        "--r-min", type=float, default=DEFAULT_R_MIN, help="smallest admissible R_s"
    )


def _add_classifier_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--qss-band",
        type=float,
        default=DEFAULT_QSS_BAND,
        help="|s(tau_f) - S*| counted as quasi-optimal",
    )
    parser.add_argument(
        "--release-horizon",
        type=float,
        default=DEFAULT_RELEASE_HORIZON,
        help="time simulated after the window closes",
    )


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(
        subparsers, "goldilocks", "distancing R that lands the epidemic on S*"
    )
    _add_outbreak_args(parser, required=True)
    parser.add_argument("--tol", type=float, default=GOLDILOCKS_TOL, help="R tolerance")
    parser.add_argument(
        "--scan", action="store_true", help="use the fixed-step downward scan"
    )
    add_gamma_arg(parser)
    add_integration_args(parser)
    parser.set_defaults(handler=run_goldilocks)

    parser = add_parser(
        subparsers, "classify", "classify a single-interval distancing policy"
    )
    parser.add_argument(
        "--config", type=Path, default=None, help="scenario file instead of flags"
    )
    _add_outbreak_args(parser, required=False)
    parser.add_argument("--tau-f", type=float, default=None, help="distancing end")
    parser.add_argument("--r-s", type=float, default=None, help="distancing R")
    _add_classifier_args(parser)
    add_gamma_arg(parser)
    add_integration_args(parser)
    parser.set_defaults(handler=run_classify)

    parser = add_parser(
        subparsers, "optimize", "synthesize and classify the quasi-optimal policy"
    )
    _add_outbreak_args(parser, required=True)
    parser.add_argument(
        "--multiplier",
        type=float,
        default=MIN_QSS_MULTIPLIER,
        help="window length in units of the peak time",
    )
    parser.add_argument(
        "--anchor",
        choices=("switch", "origin"),
        default="switch",
        help="measure the window from tau_s or from the outbreak",
    )
    _add_classifier_args(parser)
    add_gamma_arg(parser)
    add_integration_args(parser)
    parser.set_defaults(handler=run_optimize)

    parser = add_parser(subparsers, "run", "run a scenario file and export artifacts")
    parser.add_argument("config", type=Path, help="scenario JSON file")
    parser.add_argument(
        "--output-dir", type=Path, default=None, help="overrides GOLDILOCKS_OUTPUT_DIR"
    )
    parser.add_argument(
        "--record", action="store_true", help="add the run to the ledger database"
    )
    parser.set_defaults(handler=run_config)


def _report_payload(
    args: argparse.Namespace, r0: float, report: ScenarioReport
) -> dict[str, object]:
    payload: dict[str, object] = report.model_dump(mode="json")
    if getattr(args, "gamma", None) is not None:
        params = DimensionalParams(beta=r0 * args.gamma, gamma=args.gamma)
        days: dict[str, float] = {
            "tau_hat": dimensionalize(params, report.tau_hat),
            "tau_qss": dimensionalize(params, report.tau_qss),
        }
        if report.second_wave is not None:
            days["second_wave"] = dimensionalize(params, report.second_wave.tau)
        payload["days"] = days
    return payload


def run_goldilocks(args: argparse.Namespace) -> int:
    x0 = EpiState.outbreak(args.eps)
    tau_s = to_tau(args, args.r0, args.tau_s)
    opts = integration_options(args)
    if args.scan:
        r_g = goldilocks_scan(args.r0, x0, tau_s, opts=opts, r_min=args.r_min)
    else:
        r_g = goldilocks_r(args.r0, x0, tau_s, args.tol, opts, r_min=args.r_min)
    emit(f"{r_g:.6f}\n")
    return 0


def run_classify(args: argparse.Namespace) -> int:
    if args.config is not None:
        cfg = load_config(args.config)
        policy, report = evaluate(cfg)
        if policy is None or report is None:
            msg = f"{args.config} defines no distancing policy to classify"
            raise PreconditionViolation(msg)
        r0 = cfg.r0
    else:
        missing = [
            flag
            for flag, value in (
                ("--r0", args.r0),
                ("--tau-s", args.tau_s),
                ("--tau-f", args.tau_f),
                ("--r-s", args.r_s),
            )
            if value is None
        ]
        if missing:
            msg = f"classify needs --config or {', '.join(missing)}"
            raise PreconditionViolation(msg)
        r0 = args.r0
        policy = SingleIntervalPolicy(
            tau_s=to_tau(args, r0, args.tau_s),
            tau_f=to_tau(args, r0, args.tau_f),
            r_s=args.r_s,
            r0=r0,
            r_min=args.r_min,
        )
        report = classify_scenario(
            policy,
            EpiState.outbreak(args.eps),
            integration_options(args),
            qss_band=args.qss_band,
            release_horizon=args.release_horizon,
        )
    payload = {
        "policy": policy.model_dump(mode="json"),
        "report": _report_payload(args, r0, report),
    }
    emit(json.dumps(payload, indent=2) + "\n")
    return 0


def run_optimize(args: argparse.Namespace) -> int:
    x0 = EpiState.outbreak(args.eps)
    opts = integration_options(args)
    policy = quasi_optimal_policy(
        args.r0,
        x0,
        to_tau(args, args.r0, args.tau_s),
        args.multiplier,
        opts,
        anchor=args.anchor,
        r_min=args.r_min,
    )
    report = classify_scenario(
        policy,
        x0,
        opts,
        qss_band=args.qss_band,
        release_horizon=args.release_horizon,
    )
    payload = {
        "policy": policy.model_dump(mode="json"),
        "report": _report_payload(args, args.r0, report),
    }
    emit(json.dumps(payload, indent=2) + "\n")
    return 0


def run_config(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    store = get_artifact_store(args.output_dir) if args.output_dir else None
    artifact = run_scenario(cfg, store)
    if args.record:
        with session_scope() as db:
            record = record_run(db, artifact)
            logger.info("recorded run #%d", record.id)
    emit(artifact.model_dump_json(indent=2) + "\n")
    return 0
