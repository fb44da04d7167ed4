import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from zonompc.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
SQUARE = SCENARIOS / "pendulum_wall_square.yaml"


def _short(tmp_path, name="short.yaml", **overrides):
    """A ten-step square-tube pendulum scenario with optional overrides."""
    doc = yaml.safe_load(SQUARE.read_text())
    doc["horizon"] = 10
    doc["solver"] = {"mode_schedule": [0] * 9}
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


@pytest.fixture(scope="module")
def library(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("lib")
    scenario = _short(tmp)
    out = tmp / "out"
    assert main(["synth", "--scenario", str(scenario), "--out", str(out)]) == EXIT_OK
    return scenario, out


def _tree(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_synth_writes_library(library):
    _, out = library
    assert (out / "manifest.json").exists()
    assert json.loads((out / "audit.json").read_text())["passed"]
    assert (out / "outline_x0_x1.csv").read_text().startswith("k,vertex,x0,x1")


def test_synth_is_byte_identical(tmp_path, library):
    scenario, out = library
    again = tmp_path / "again"
    assert main(["synth", "--scenario", str(scenario), "--out", str(again)]) == EXIT_OK
    assert _tree(out) == _tree(again)


def test_simulate_is_byte_identical(tmp_path, library):
    scenario, out = library
    runs = []
    for name, workers in (("a", "1"), ("b", "2")):
        dest = tmp_path / name
        argv = ["simulate", "--scenario", str(scenario), "--library", str(out), "--out", str(dest)]
        assert main(argv + ["--rollouts", "6", "--seed", "9", "--workers", workers]) == EXIT_OK
        runs.append(_tree(dest))
    assert runs[0] == runs[1]
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["seed"] == 9 and summary["plant"] == "vertex"


def test_policy_eval(capsys, library):
    _, out = library
    assert main(["policy-eval", "--library", str(out), "--state", "0.0,0.0"]) == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line.startswith("kappa=") and " u=" in line
    assert main(["policy-eval", "--library", str(out), "--state", "0.0,0.0,0.0"]) == EXIT_CONFIG
    assert "library expects 2" in capsys.readouterr().err


def test_bench_reduce(tmp_path, library, capsys):
    scenario, out = library
    dest = tmp_path / "bench"
    argv = ["bench-reduce", "--scenario", str(scenario), "--library", str(out), "--out", str(dest)]
    assert main(argv + ["--reduction-p", "2", "--methods", "reazor,girard"]) == EXIT_OK
    table = capsys.readouterr().out
    assert "reazor" in table and "girard" in table
    assert (dest / "benchmark.csv").exists()
    assert main(argv + ["--methods", "scott"]) == EXIT_CONFIG


def test_infeasible_exit_code(tmp_path):
    sets = {
        "x0": {"center": [0.3, 0.0], "half_widths": [0.02, 0.4]},
        "goal": {"half_widths": [1.0e-4, 1.0e-4]},
        "disturbance": {"half_widths": [1.0e-3, 1.0e-2]},
        "input": {"half_width": 0.5},
    }
    scenario = _short(tmp_path, sets=sets)
    assert main(["synth", "--scenario", str(scenario), "--out", str(tmp_path / "o")]) == EXIT_INFEASIBLE


def test_budget_exit_code(tmp_path):
    doc = yaml.safe_load((SCENARIOS / "pendulum_wall.yaml").read_text())
    doc.update(horizon=12, solver={"max_nodes": 1})
    path = tmp_path / "budget.yaml"
    path.write_text(yaml.safe_dump(doc))
    assert main(["synth", "--scenario", str(path), "--out", str(tmp_path / "o")]) == EXIT_BUDGET


@pytest.mark.parametrize(
    "override, message",
    [
        ({"schema_version": 7}, "schema_version"),
        ({"horizon": 1, "solver": {}}, "N >= 2 required"),
        ({"model": "quadrotor"}, "model must be one of"),
        ({"solver": {"warp": 1}}, "unknown solver option"),
    ],
)
def test_config_errors(tmp_path, capsys, override, message):
    scenario = _short(tmp_path, **override)
    assert main(["synth", "--scenario", str(scenario), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert message in capsys.readouterr().err


def test_nominal_csv_missing_column(tmp_path, capsys):
    (tmp_path / "nom.csv").write_text("t,q,u\n" + "0,0,0\n" * 11)
    scenario = _short(tmp_path, nominal="nom.csv")
    assert main(["synth", "--scenario", str(scenario), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "'dq'" in capsys.readouterr().err


def test_missing_files_and_bad_arguments(tmp_path):
    assert main(["synth", "--scenario", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["synth", "--scenario", str(SQUARE)]) == EXIT_CONFIG
    argv = ["simulate", "--scenario", str(SQUARE), "--library", str(tmp_path), "--out", str(tmp_path / "o")]
    assert main(argv) == EXIT_CONFIG


def test_console_entry_point(library):
    _, out = library
    proc = subprocess.run(
        [sys.executable, "-m", "zonompc.cli", "policy-eval", "--library", str(out), "--state", "0.01,0.1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("kappa=")


def test_shipped_pendubot_scenario(tmp_path, capsys):
    out = tmp_path / "pendubot"
    assert main(["synth", "--scenario", str(SCENARIOS / "pendubot.yaml"), "--out", str(out)]) == EXIT_OK
    assert "audit=feasible" in capsys.readouterr().out
    # four states give two position/velocity outlines
    assert (out / "outline_x0_x2.csv").exists() and (out / "outline_x1_x3.csv").exists()
