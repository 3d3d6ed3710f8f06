import json
import os

import pytest
import yaml

from quadbench.cli import EXIT_ALL_DNF, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, main
from quadbench.config import default_config


def _write_yaml(path, doc):
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh)
    return str(path)


@pytest.fixture()
def short_config(tmp_path):
    # short but completable sprint: one trial, lowered episode budget
    return _write_yaml(
        tmp_path / "run.yaml",
        {"run": {"trials": 1, "sprint_duration": 12.0, "output_dir": str(tmp_path / "out")}},
    )


def test_sprint_writes_artifacts_and_exits_ok(short_config, tmp_path):
    out = tmp_path / "out"
    code = main(["--config", short_config, "sprint"])
    assert code == EXIT_OK
    assert (out / "trial_sprint_000_seed0.jsonl").exists()
    assert (out / "summary_sprint.csv").exists()
    entry = json.loads((out / "leaderboard_sprint.json").read_text())
    assert entry["task"] == "sprint"
    assert entry["config_hash"]
    assert entry["tool_version"]
    assert 0.3 < entry["mean"] < 0.9


def test_all_dnf_exit_code(tmp_path):
    cfg = _write_yaml(
        tmp_path / "run.yaml",
        {"run": {"trials": 1, "sprint_duration": 2.0, "output_dir": str(tmp_path / "out")}},
    )
    assert main(["--config", cfg, "sprint"]) == EXIT_ALL_DNF


def test_config_error_exit_code(tmp_path):
    cfg = _write_yaml(tmp_path / "run.yaml", {"gait": {"not_a_key": 1}})
    assert main(["--config", cfg, "sprint"]) == EXIT_CONFIG


def test_divergence_exit_code(tmp_path):
    cfg = _write_yaml(
        tmp_path / "run.yaml",
        {
            "terrain": {"stiffness": 1e12},
            "run": {"trials": 1, "sprint_duration": 5.0, "output_dir": str(tmp_path / "out")},
        },
    )
    assert main(["--config", cfg, "sprint"]) == EXIT_DIVERGENCE


def test_dyno_outputs(tmp_path):
    code = main(["--out", str(tmp_path), "dyno"])
    assert code == EXIT_OK
    surface = (tmp_path / "dyno_surface.csv").read_text().splitlines()
    assert surface[0] == "speed_rad_s,current_a,torque_nm"
    assert len(surface) == 1 + 25 * 41
    bode = (tmp_path / "dyno_bode.csv").read_text().splitlines()
    assert bode[0] == "freq_hz,gain"
    assert len(bode) == 41


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("QUADBENCH_OUT", str(tmp_path / "envout"))
    assert main(["dyno"]) == EXIT_OK
    assert (tmp_path / "envout" / "dyno_surface.csv").exists()


def test_replay_matches_original_score(short_config, tmp_path, capsys):
    main(["--config", short_config, "sprint"])
    summary = (tmp_path / "out" / "summary_sprint.csv").read_text().splitlines()
    recorded = float(summary[1].split(",")[4])
    log_file = str(tmp_path / "out" / "trial_sprint_000_seed0.jsonl")
    assert main(["--config", short_config, "replay", log_file]) == EXIT_OK
    printed = capsys.readouterr().out
    line = [ln for ln in printed.splitlines() if ln.startswith("score:")][-1]
    assert float(line.split()[1]) == pytest.approx(recorded, abs=1e-6)


def test_replay_hash_mismatch(short_config, tmp_path):
    main(["--config", short_config, "sprint"])
    log_file = str(tmp_path / "out" / "trial_sprint_000_seed0.jsonl")
    other = _write_yaml(tmp_path / "other.yaml", {"gait": {"frequency": 1.0}})
    assert main(["--config", other, "replay", log_file]) == EXIT_CONFIG
    assert main(["--config", other, "replay", log_file, "--force"]) == EXIT_OK


def test_replay_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("not json\n")
    assert main(["replay", str(bad)]) == EXIT_CONFIG


def test_tune_outputs(tmp_path):
    cfg = _write_yaml(
        tmp_path / "run.yaml",
        {"run": {"tune_duration": 1.0, "output_dir": str(tmp_path / "out")}},
    )
    code = main(["--config", cfg, "tune", "--budget", "2", "--method", "random-search"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "out" / "tune_sprint.json").read_text())
    assert report["budget_used"] == 2
    best = yaml.safe_load((tmp_path / "out" / "best_gait_sprint.yaml").read_text())
    assert "frequency" in best["gait"]


def test_cli_runs_are_bit_identical(tmp_path):
    doc = {"run": {"trials": 1, "sprint_duration": 6.0}}
    cfg = _write_yaml(tmp_path / "run.yaml", doc)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["--config", cfg, "--out", str(out_a), "sprint"])
    main(["--config", cfg, "--out", str(out_b), "sprint"])
    log_a = (out_a / "trial_sprint_000_seed0.jsonl").read_bytes()
    log_b = (out_b / "trial_sprint_000_seed0.jsonl").read_bytes()
    assert log_a == log_b
