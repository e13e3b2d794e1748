"""
Scenario execution and the reproduction of the published reference runs.

The reference setting is r0 = 2.5 from the outbreak state (0.995, 0.005, 0)
with distancing from tau_s = 2. Published values are embedded below with
the tolerances they are checked against.
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from sqlalchemy.orm import Session

from goldilocks_sir import __version__
from goldilocks_sir.dao import RunDAO
from goldilocks_sir.dynamics import (
    EpiState,
    IntegrationOptions,
    ReproductionSchedule,
    integrate,
)
from goldilocks_sir.final_size import herd_immunity_threshold, s_infinity
from goldilocks_sir.intervention import (
    ScenarioClass,
    ScenarioReport,
    SingleIntervalPolicy,
    classify_scenario,
    goldilocks_r,
    quasi_optimal_policy,
)
from goldilocks_sir.models import RunRecord
from goldilocks_sir.schemas import (
    DEFAULT_TAU_END,
    ComparisonRow,
    GoldilocksDirective,
    PolicySettings,
    RunArtifact,
    ScenarioConfig,
    TrajectoryDocument,
)
from goldilocks_sir.storage import ArtifactStore, get_artifact_store
from goldilocks_sir.utils.digest import run_digest, text_digest

logger = logging.getLogger(__name__)

REFERENCE_R0 = 2.5
REFERENCE_EPSILON = 0.005
REFERENCE_TAU_S = 2.0
REFERENCE_TAU_F = 21.6
SHORT_TERM_TAU_F = 8.0
SHORT_TERM_GRID = np.round(np.arange(0.85, 1.8 + 1e-9, 0.01), 2)

PUBLISHED_GOLDILOCKS = 1.4157
PUBLISHED_TAU_HAT = 3.6
PUBLISHED_QUASI_OPTIMAL = 0.3942
PUBLISHED_SOFT = 0.2453
PUBLISHED_STRONG = 0.1989
PUBLISHED_STRONG_PLATEAU = 0.70
PUBLISHED_SHORT_TERM = (0.2066, 0.2322, 0.2480, 0.2384)

SOFT_R_S = 1.8
STRONG_R_S = 0.85


def resolve_policy(
    cfg: ScenarioConfig, opts: IntegrationOptions
) -> SingleIntervalPolicy | None:
    match cfg.policy:
        case None:
            return None
        case PolicySettings(tau_s=tau_s, tau_f=tau_f, r_s=r_s):
            return SingleIntervalPolicy(
                tau_s=tau_s,
                tau_f=tau_f,
                r_s=r_s,
                r0=cfg.r0,
                r_min=cfg.thresholds.r_min,
            )
        case GoldilocksDirective(
            tau_s=tau_s, qss_multiplier=multiplier, anchor=anchor
        ):
            return quasi_optimal_policy(
                cfg.r0,
                cfg.initial_state(),
                tau_s,
                multiplier,
                opts,
                anchor=anchor,
                r_min=cfg.thresholds.r_min,
            )


def evaluate(
    cfg: ScenarioConfig,
) -> tuple[SingleIntervalPolicy | None, ScenarioReport | None]:
    """Resolve the configured policy and classify it."""
    opts = cfg.integration_options()
    policy = resolve_policy(cfg, opts)
    if policy is None:
        return None, None
    report = classify_scenario(
        policy,
        cfg.initial_state(),
        opts,
        qss_band=cfg.thresholds.qss_band,
        release_horizon=cfg.integration.release_horizon,
    )
    return policy, report


def run_scenario(
    cfg: ScenarioConfig, store: ArtifactStore | None = None
) -> RunArtifact:
    """
    Integrate, classify and export one scenario. The digest covers the
    scenario (output settings aside), its results and the toolkit version,
    so identical inputs give identical digests.
    """
    opts = cfg.integration_options()
    x0 = cfg.initial_state()
    policy, report = evaluate(cfg)
    if policy is None:
        schedule = ReproductionSchedule.constant(cfg.r0)
        tau_end = cfg.tau_end or DEFAULT_TAU_END
    else:
        schedule = policy.schedule()
        tau_end = cfg.tau_end or policy.tau_f + cfg.integration.release_horizon
    traj = integrate(x0, schedule, tau_end, opts)
    csv = traj.to_csv()

    s_inf = report.s_infinity if report else s_infinity(cfg.r0, x0.s, x0.i)
    digest = run_digest(
        {
            "scenario": cfg.model_dump(mode="json", exclude={"output"}),
            "policy": policy.model_dump(mode="json") if policy else None,
            "report": report.model_dump(mode="json") if report else None,
            "trajectory": text_digest(csv),
            "version": __version__,
        }
    )
    artifact = RunArtifact(
        scenario_id=cfg.scenario_id,
        digest=digest,
        toolkit_version=__version__,
        config=cfg,
        policy=policy,
        report=report,
        s_infinity=s_inf,
        s_star=herd_immunity_threshold(cfg.r0),
    )

    if store is None:
        root = Path(cfg.output.directory) if cfg.output.directory else None
        store = get_artifact_store(root)
    stem = f"{cfg.scenario_id}-{digest[:12]}"
    updates: dict[str, str] = {}
    if cfg.output.write_trajectory:
        updates["trajectory_ref"] = store.write_text(f"{stem}.csv", csv)
    if cfg.output.write_json:
        document = TrajectoryDocument.from_trajectory(traj).model_dump_json()
        updates["trajectory_json_ref"] = store.write_text(f"{stem}.json", document)
    artifact = artifact.model_copy(update=updates)
    store.write_text(f"{stem}.run.json", artifact.model_dump_json(indent=2))
    logger.info("scenario %s finished: digest %s", cfg.scenario_id, digest[:12])
    return artifact


def record_run(db: Session, artifact: RunArtifact) -> RunRecord:
    return RunDAO(db).create(
        digest=artifact.digest,
        scenario_id=artifact.scenario_id,
        classification=(
            str(artifact.report.classification) if artifact.report else None
        ),
        s_infinity=artifact.s_infinity,
        s_star=artifact.s_star,
        artifact_path=artifact.trajectory_ref,
        toolkit_version=artifact.toolkit_version,
    )


def reference_config(
    scenario_id: str, r_s: float, tau_f: float = REFERENCE_TAU_F
) -> ScenarioConfig:
    return ScenarioConfig(
        scenario_id=scenario_id,
        r0=REFERENCE_R0,
        epsilon=REFERENCE_EPSILON,
        policy=PolicySettings(tau_s=REFERENCE_TAU_S, tau_f=tau_f, r_s=r_s),
    )


def _reference_report(r_s: float, tau_f: float) -> ScenarioReport:
    policy = SingleIntervalPolicy(
        tau_s=REFERENCE_TAU_S, tau_f=tau_f, r_s=r_s, r0=REFERENCE_R0
    )
    return classify_scenario(policy, EpiState.outbreak(REFERENCE_EPSILON))


def _goldilocks_rows() -> list[ComparisonRow]:
    r_g = goldilocks_r(
        REFERENCE_R0, EpiState.outbreak(REFERENCE_EPSILON), REFERENCE_TAU_S
    )
    return [
        ComparisonRow(
            scenario_id="goldilocks",
            quantity="r_g",
            published=PUBLISHED_GOLDILOCKS,
            reproduced=r_g,
            tolerance=5e-4,
        )
    ]


def _quasi_optimal_rows() -> list[ComparisonRow]:
    report = _reference_report(PUBLISHED_GOLDILOCKS, REFERENCE_TAU_F)
    return [
        ComparisonRow(
            scenario_id="quasi-optimal",
            quantity="s_infinity",
            published=PUBLISHED_QUASI_OPTIMAL,
            reproduced=report.s_infinity,
            tolerance=5e-3,
            expected_class=ScenarioClass.QUASI_OPTIMAL,
            reproduced_class=report.classification,
        ),
        ComparisonRow(
            scenario_id="quasi-optimal",
            quantity="tau_hat",
            published=PUBLISHED_TAU_HAT,
            reproduced=report.tau_hat,
            tolerance=0.1,
        ),
    ]


def _soft_rows() -> list[ComparisonRow]:
    report = _reference_report(SOFT_R_S, REFERENCE_TAU_F)
    return [
        ComparisonRow(
            scenario_id="soft",
            quantity="s_infinity",
            published=PUBLISHED_SOFT,
            reproduced=report.s_infinity,
            tolerance=5e-3,
            expected_class=ScenarioClass.SOFT_LONG_TERM,
            reproduced_class=report.classification,
        )
    ]


def _strong_rows() -> list[ComparisonRow]:
    report = _reference_report(STRONG_R_S, REFERENCE_TAU_F)
    wave = report.second_wave
    return [
        ComparisonRow(
            scenario_id="strong",
            quantity="s_infinity",
            published=PUBLISHED_STRONG,
            reproduced=report.s_infinity,
            tolerance=5e-3,
            expected_class=ScenarioClass.STRONG_LONG_TERM,
            reproduced_class=report.classification,
            note=(
                f"second wave peaks at tau={wave.tau:.3f} with i={wave.peak:.4f}"
                if wave
                else "no second wave"
            ),
        ),
        ComparisonRow(
            scenario_id="strong",
            quantity="s_at_tf",
            published=PUBLISHED_STRONG_PLATEAU,
            reproduced=report.s_at_tf,
            tolerance=1e-2,
        ),
    ]


def short_term_sweep(
    grid: NDArray[np.float64] = SHORT_TERM_GRID,
    tau_f: float = SHORT_TERM_TAU_F,
    opts: IntegrationOptions | None = None,
) -> list[tuple[float, float]]:
    """(r_s, S_inf) for windows [tau_s, tau_f] with r_s over grid."""
    x0 = EpiState.outbreak(REFERENCE_EPSILON)
    out: list[tuple[float, float]] = []
    for r_s in grid.tolist():
        schedule = ReproductionSchedule.single_interval(
            REFERENCE_R0, r_s, REFERENCE_TAU_S, tau_f
        )
        x_f = integrate(x0, schedule, tau_f, opts).final_state
        out.append((r_s, s_infinity(REFERENCE_R0, x_f.s, x_f.i)))
    return out


def _short_term_rows() -> list[ComparisonRow]:
    sweep = short_term_sweep()
    rows: list[ComparisonRow] = []
    for k, published in enumerate(PUBLISHED_SHORT_TERM):
        r_s, _ = min(sweep, key=lambda pair: abs(pair[1] - published))
        report = _reference_report(r_s, SHORT_TERM_TAU_F)
        rows.append(
            ComparisonRow(
                scenario_id=f"short-term-{k + 1}",
                quantity="s_infinity",
                published=published,
                reproduced=report.s_infinity,
                tolerance=1e-2,
                expected_class=ScenarioClass.SHORT_TERM,
                reproduced_class=report.classification,
                note=f"fitted r_s={r_s:.2f}",
            )
        )
    return rows


REFERENCE_RUNS: tuple[Callable[[], list[ComparisonRow]], ...] = (
    _goldilocks_rows,
    _quasi_optimal_rows,
    _soft_rows,
    _strong_rows,
    _short_term_rows,
)


def reproduce_reference_runs(jobs: int = 1) -> list[ComparisonRow]:
    """
    Every reference run next to its published values. Runs are independent;
    with jobs > 1 they execute on a thread pool and the rows come back in
    the fixed run order regardless.
    """
    if jobs <= 1:
        batches = [run() for run in REFERENCE_RUNS]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(lambda run: run(), REFERENCE_RUNS))
    rows = [row for batch in batches for row in batch]
    failed = [row for row in rows if not row.passed]
    for row in failed:
        logger.warning(
            "%s %s: published %.6g, reproduced %.6g",
            row.scenario_id,
            row.quantity,
            row.published,
            row.reproduced,
        )
    return rows


def format_comparison(rows: list[ComparisonRow]) -> str:
    header = (
        f"{'scenario':<16} {'quantity':<11} {'published':>10} "
        f"{'reproduced':>11} {'tol':>7}  {'status':<6} note"
    )
    lines = [header, "-" * len(header)]
    lines.extend(
        f"{row.scenario_id:<16} {row.quantity:<11} {row.published:>10.4f} "
        f"{row.reproduced:>11.4f} {row.tolerance:>7.4f}  "
        f"{'ok' if row.passed else 'FAIL':<6} {row.note}".rstrip()
        for row in rows
    )
    return "\n".join(lines) + "\n"
