import json

import pytest
from sqlalchemy.orm import Session

from goldilocks_sir.dao import RunDAO
from goldilocks_sir.dynamics import CSV_HEADER
from goldilocks_sir.final_size import s_infinity
from goldilocks_sir.intervention import ScenarioClass
from goldilocks_sir.runner import (
    PUBLISHED_GOLDILOCKS,
    PUBLISHED_QUASI_OPTIMAL,
    PUBLISHED_SHORT_TERM,
    PUBLISHED_SOFT,
    PUBLISHED_STRONG,
    SOFT_R_S,
    STRONG_R_S,
    format_comparison,
    record_run,
    reference_config,
    reproduce_reference_runs,
    run_scenario,
    short_term_sweep,
)
from goldilocks_sir.schemas import (
    ComparisonRow,
    GoldilocksDirective,
    OutputSettings,
    ScenarioConfig,
    TrajectoryDocument,
)
from goldilocks_sir.storage_local import MemoryArtifactStore

R0 = 2.5
VALUE_TOL = 5e-3


def test_quasi_optimal_run(memory_store: MemoryArtifactStore) -> None:
    cfg = reference_config("quasi", PUBLISHED_GOLDILOCKS)
    artifact = run_scenario(cfg, memory_store)
    assert artifact.report is not None
    assert artifact.report.classification is ScenarioClass.QUASI_OPTIMAL
    assert artifact.s_infinity == pytest.approx(PUBLISHED_QUASI_OPTIMAL, abs=VALUE_TOL)
    stem = f"quasi-{artifact.digest[:12]}"
    assert memory_store.list_artifacts() == [f"{stem}.csv", f"{stem}.run.json"]
    csv = memory_store.read_text(f"{stem}.csv")
    assert csv.splitlines()[0] == CSV_HEADER
    assert artifact.trajectory_ref == f"memory://{stem}.csv"


def test_run_artifact_document(memory_store: MemoryArtifactStore) -> None:
    artifact = run_scenario(reference_config("soft", SOFT_R_S), memory_store)
    stem = f"soft-{artifact.digest[:12]}"
    document = json.loads(memory_store.read_text(f"{stem}.run.json"))
    assert document["digest"] == artifact.digest
    assert document["report"]["classification"] == "SoftLongTerm"
    assert document["s_infinity"] == pytest.approx(PUBLISHED_SOFT, abs=VALUE_TOL)


def test_strong_run_reports_second_wave(memory_store: MemoryArtifactStore) -> None:
    artifact = run_scenario(reference_config("strong", STRONG_R_S), memory_store)
    assert artifact.report is not None
    assert artifact.report.second_wave is not None
    assert artifact.s_infinity == pytest.approx(PUBLISHED_STRONG, abs=VALUE_TOL)


def test_digest_is_deterministic() -> None:
    cfg = reference_config("repeat", SOFT_R_S)
    elsewhere = OutputSettings(directory="elsewhere")
    relocated = cfg.model_copy(update={"output": elsewhere})
    first = run_scenario(cfg, MemoryArtifactStore())
    second = run_scenario(relocated, MemoryArtifactStore())
    assert first.digest == second.digest
    other = run_scenario(reference_config("repeat", 1.7), MemoryArtifactStore())
    assert other.digest != first.digest


def test_run_without_policy(memory_store: MemoryArtifactStore) -> None:
    cfg = ScenarioConfig(scenario_id="baseline", r0=R0)
    artifact = run_scenario(cfg, memory_store)
    x0 = cfg.initial_state()
    assert artifact.policy is None
    assert artifact.report is None
    assert artifact.s_infinity == s_infinity(R0, x0.s, x0.i)


def test_goldilocks_directive_run(memory_store: MemoryArtifactStore) -> None:
    cfg = ScenarioConfig(
        scenario_id="directive",
        r0=R0,
        policy=GoldilocksDirective(tau_s=2.0, qss_multiplier=6.0),
    )
    artifact = run_scenario(cfg, memory_store)
    assert artifact.policy is not None
    assert artifact.policy.r_s == pytest.approx(PUBLISHED_GOLDILOCKS, abs=5e-4)


def test_json_trajectory_export(memory_store: MemoryArtifactStore) -> None:
    cfg = ScenarioConfig(
        scenario_id="json",
        r0=R0,
        tau_end=10.0,
        output=OutputSettings(write_trajectory=False, write_json=True),
    )
    artifact = run_scenario(cfg, memory_store)
    assert artifact.trajectory_ref is None
    stem = f"json-{artifact.digest[:12]}"
    document = TrajectoryDocument.model_validate_json(
        memory_store.read_text(f"{stem}.json")
    )
    assert len(document.tau) == len(document.s)
    assert document.tau[-1] == pytest.approx(cfg.tau_end)


def test_json_export_lists_second_waves(memory_store: MemoryArtifactStore) -> None:
    cfg = reference_config("strong", STRONG_R_S).model_copy(
        update={"output": OutputSettings(write_trajectory=False, write_json=True)}
    )
    artifact = run_scenario(cfg, memory_store)
    assert artifact.report is not None
    assert artifact.report.second_wave is not None
    document = TrajectoryDocument.model_validate_json(
        memory_store.read_text(f"strong-{artifact.digest[:12]}.json")
    )
    assert document.second_waves
    assert document.second_waves[0].tau == pytest.approx(
        artifact.report.second_wave.tau
    )


def test_record_run_is_idempotent(
    session: Session, memory_store: MemoryArtifactStore
) -> None:
    artifact = run_scenario(reference_config("ledger", SOFT_R_S), memory_store)
    first = record_run(session, artifact)
    second = record_run(session, artifact)
    assert first.id == second.id
    assert first.classification == "SoftLongTerm"
    assert len(RunDAO(session).list()) == 1


def test_short_term_sweep_covers_published_values() -> None:
    sweep = short_term_sweep()
    for published in PUBLISHED_SHORT_TERM:
        closest = min(abs(value - published) for _, value in sweep)
        assert closest <= 1e-2


def test_format_comparison() -> None:
    rows = [
        ComparisonRow(
            scenario_id="goldilocks",
            quantity="r_g",
            published=1.4157,
            reproduced=1.4158,
            tolerance=5e-4,
        ),
        ComparisonRow(
            scenario_id="soft",
            quantity="s_infinity",
            published=0.2453,
            reproduced=0.2453,
            tolerance=5e-3,
            expected_class="SoftLongTerm",
            reproduced_class="StrongLongTerm",
        ),
    ]
    assert rows[0].passed
    assert not rows[1].passed
    lines = format_comparison(rows).splitlines()
    expected_lines = 4
    assert len(lines) == expected_lines
    assert lines[0].startswith("scenario")
    assert " ok" in lines[2]
    assert "FAIL" in lines[3]


@pytest.mark.slow
def test_reference_runs_reproduce() -> None:
    rows = reproduce_reference_runs()
    failed = [f"{r.scenario_id}/{r.quantity}" for r in rows if not r.passed]
    assert failed == []


@pytest.mark.slow
def test_reference_runs_keep_order_with_threads() -> None:
    serial = reproduce_reference_runs()
    threaded = reproduce_reference_runs(jobs=4)
    assert [(r.scenario_id, r.quantity) for r in serial] == [
        (r.scenario_id, r.quantity) for r in threaded
    ]
    assert [r.reproduced for r in serial] == [r.reproduced for r in threaded]
