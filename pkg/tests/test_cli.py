import json
from pathlib import Path

import pytest

from goldilocks_sir import __version__
from goldilocks_sir.config import serialize_config
from goldilocks_sir.dynamics import CSV_HEADER
from goldilocks_sir.main import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, cli_dispatch
from goldilocks_sir.runner import PUBLISHED_GOLDILOCKS, reference_config
from goldilocks_sir.stability import CURVE_CSV_HEADER

REFERENCE_FINAL_SIZE = 0.1074
S_STAR = 0.4


def _values(text: str) -> dict[str, float]:
    return {
        key: float(value)
        for key, value in (line.split("=") for line in text.splitlines())
    }


def test_final_size(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli_dispatch(["final-size", "--r", "2.5", "--s0", "0.995", "--i0", "0.005"])
    assert code == EXIT_OK
    values = _values(capsys.readouterr().out)
    assert values["s_infinity"] == pytest.approx(REFERENCE_FINAL_SIZE, abs=1e-3)
    assert values["s_star"] == pytest.approx(S_STAR)


def test_final_size_optimum(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["final-size", "--r", "2.5", "--s0", "0.9", "--i0", "0.1", "--delta", "0"]
    assert cli_dispatch(argv) == EXIT_OK
    values = _values(capsys.readouterr().out)
    assert values["s_inf_op"] == pytest.approx(S_STAR)


def test_goldilocks(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["goldilocks", "--r0", "2.5", "--tau-s", "2"]) == EXIT_OK
    r_g = float(capsys.readouterr().out)
    assert r_g == pytest.approx(PUBLISHED_GOLDILOCKS, abs=5e-4)


def test_goldilocks_without_solution(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["goldilocks", "--r0", "2.5", "--tau-s", "2", "--r-min", "2.0"]
    assert cli_dispatch(argv) == EXIT_NUMERICAL
    assert capsys.readouterr().err.startswith("error:")


def test_goldilocks_scan(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["goldilocks", "--r0", "2.5", "--tau-s", "2", "--scan"]
    assert cli_dispatch(argv) == EXIT_OK
    r_g = float(capsys.readouterr().out)
    # the scan stops on its 1e-4 grid at or below the bisection root
    assert r_g == pytest.approx(PUBLISHED_GOLDILOCKS, abs=1e-3)


def test_optimize(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["optimize", "--r0", "2.5", "--tau-s", "2", "--multiplier", "6"]
    assert cli_dispatch(argv) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["policy"]["r_s"] == pytest.approx(PUBLISHED_GOLDILOCKS, abs=5e-4)
    assert payload["policy"]["tau_f"] > payload["policy"]["tau_s"]
    assert payload["report"]["classification"] == "QuasiOptimal"
    assert payload["report"]["second_wave"] is None


def test_optimize_rejects_short_multiplier(
    capsys: pytest.CaptureFixture[str],
) -> None:
    argv = ["optimize", "--r0", "2.5", "--tau-s", "2", "--multiplier", "3"]
    assert cli_dispatch(argv) == EXIT_INPUT
    assert "qss_multiplier" in capsys.readouterr().err


def test_classify_from_flags(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["classify", "--r0", "2.5", "--tau-s", "10", "--tau-f", "108"]
    argv += ["--r-s", "1.8", "--gamma", "0.2"]
    assert cli_dispatch(argv) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["classification"] == "SoftLongTerm"
    # 108 days at gamma 0.2 is 21.6 time units
    expected_tau_f = 21.6
    assert payload["policy"]["tau_f"] == pytest.approx(expected_tau_f)
    assert "days" in payload["report"]


def test_classify_needs_a_policy(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["classify", "--r0", "2.5"]) == EXIT_INPUT
    assert "--tau-s" in capsys.readouterr().err


def test_classify_from_config(
    capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    path = tmp_path / "strong.json"
    path.write_text(serialize_config(reference_config("strong", 0.85)))
    assert cli_dispatch(["classify", "--config", str(path)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["classification"] == "StrongLongTerm"
    assert payload["report"]["second_wave"] is not None


def test_invalid_value_is_an_input_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["final-size", "--r", "-1", "--s0", "0.5"]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_command_is_a_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["frobnicate"]) == EXIT_INPUT
    assert "usage" in capsys.readouterr().err


def test_help_and_version(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["--help"]) == EXIT_OK
    assert "final-size" in capsys.readouterr().out
    assert cli_dispatch(["--version"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == __version__


def test_simulate_csv_to_file(tmp_path: Path) -> None:
    output = tmp_path / "out" / "baseline.csv"
    argv = ["simulate", "--r0", "2.5", "--tau-end", "10", "--output", str(output)]
    assert cli_dispatch(argv) == EXIT_OK
    lines = output.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert float(lines[-1].split(",")[0]) == pytest.approx(10.0)


def test_simulate_in_days(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["simulate", "--r0", "2.5", "--tau-end", "50", "--gamma", "0.2"]
    argv += ["--format", "json"]
    assert cli_dispatch(argv) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    expected_tau_end = 10.0
    assert document["tau"][-1] == pytest.approx(expected_tau_end)


def test_simulate_partial_window(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["simulate", "--r0", "2.5", "--tau-s", "2"]
    assert cli_dispatch(argv) == EXIT_INPUT
    assert "together" in capsys.readouterr().err


def test_level_curves(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["level-curves", "--levels", "0.1", "0.2", "--n", "20"]
    assert cli_dispatch(argv) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == CURVE_CSV_HEADER
    assert {line.split(",")[0] for line in lines[1:]} == {"0", "1"}


def test_level_curves_past_threshold(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["level-curves", "--levels", "0.5"]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error:")


def test_phase_portrait(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["phase-portrait", "--starts", "3", "--tau-end", "5", "--jobs", "2"]
    assert cli_dispatch(argv) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert {line.split(",")[0] for line in lines[1:]} == {"0", "1", "2"}


def test_run_and_record(
    capsys: pytest.CaptureFixture[str],
    monkeypatch: pytest.MonkeyPatch,
    tmp_path: Path,
) -> None:
    monkeypatch.setenv("GOLDILOCKS_DATABASE_URL", f"sqlite:///{tmp_path / 'ledger.db'}")
    monkeypatch.setenv("GOLDILOCKS_ARTIFACT_BACKEND", "local")
    config = tmp_path / "soft.json"
    config.write_text(serialize_config(reference_config("soft", 1.8)))
    output_dir = tmp_path / "artifacts"
    argv = ["run", str(config), "--output-dir", str(output_dir), "--record"]
    assert cli_dispatch(argv) == EXIT_OK
    artifact = json.loads(capsys.readouterr().out)
    assert Path(artifact["trajectory_ref"]).parent == output_dir
    assert cli_dispatch(["runs"]) == EXIT_OK
    listing = capsys.readouterr().out
    assert "soft" in listing
    assert "SoftLongTerm" in listing


def test_runs_on_empty_ledger(
    capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    url = f"sqlite:///{tmp_path / 'empty.db'}"
    assert cli_dispatch(["runs", "--database-url", url]) == EXIT_OK
    assert capsys.readouterr().out == "no runs recorded\n"


def test_unusable_ledger_is_an_input_error(
    capsys: pytest.CaptureFixture[str],
) -> None:
    argv = ["runs", "--database-url", "nosuchdialect://ledger"]
    assert cli_dispatch(argv) == EXIT_INPUT
    assert "run ledger" in capsys.readouterr().err


def test_run_with_malformed_config(
    capsys: pytest.CaptureFixture[str], tmp_path: Path
) -> None:
    config = tmp_path / "broken.json"
    config.write_text("{not json")
    assert cli_dispatch(["run", str(config)]) == EXIT_INPUT
    assert "not valid JSON" in capsys.readouterr().err


@pytest.mark.slow
def test_reproduce_reference_runs(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["reproduce", "--format", "json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert all(row["passed"] for row in rows)
    assert {row["scenario_id"] for row in rows} >= {
        "goldilocks",
        "quasi-optimal",
        "soft",
        "strong",
    }


def test_reproduce_paper_alias(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_dispatch(["reproduce-paper", "--help"]) == EXIT_OK
    assert "--jobs" in capsys.readouterr().out
