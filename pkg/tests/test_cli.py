"""
Tests for the autolim CLI module.
"""

import csv
import json

import pytest

from autolim import __version__, limits
from autolim.cli import main, parse_command_args, run, supports_color
from autolim.errors import ConfigError

TWO_STATE = {"family": "two_state", "alpha": 1, "k": 1, "g": 1, "h": 3, "a": 1}


def _config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ─── Argument Parsing ─────────────────────────────────────────────────────


def test_parse_args_defaults():
    opts = parse_command_args([], "limits")
    assert opts == {"config": None, "out": None, "seed": None, "verbose": False}


def test_parse_args_all_options():
    opts = parse_command_args(["--config", "a.json", "--out", "b.csv", "--seed", "7", "-v"], "verify")
    assert opts == {"config": "a.json", "out": "b.csv", "seed": 7, "verbose": True}


def test_parse_args_missing_value():
    with pytest.raises(ConfigError, match="--config requires a value"):
        parse_command_args(["--config"], "limits")


def test_parse_args_unknown_option():
    with pytest.raises(ConfigError, match="Unknown option: --force"):
        parse_command_args(["--force"], "limits")


def test_parse_args_bad_seed():
    with pytest.raises(ConfigError, match="--seed must be an integer"):
        parse_command_args(["--seed", "abc"], "verify")


def test_command_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc_info:
        parse_command_args(["--help"], "sweep")
    assert exc_info.value.code == 0
    assert "autolim sweep" in capsys.readouterr().out


# ─── Colors ───────────────────────────────────────────────────────────────


def test_no_color_env(monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    assert supports_color() is False


def test_force_color_env(monkeypatch):
    monkeypatch.delenv("NO_COLOR", raising=False)
    monkeypatch.setenv("FORCE_COLOR", "1")
    assert supports_color() is True


# ─── Top level ────────────────────────────────────────────────────────────


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_help(capsys):
    assert run([]) == 0
    out = capsys.readouterr().out
    assert "USAGE" in out
    assert "verify" in out


def test_unknown_command_suggestion(capsys):
    assert run(["limts"]) == 1
    assert "Did you mean 'limits'?" in capsys.readouterr().err


def test_main_exits_with_code(monkeypatch):
    monkeypatch.setattr("sys.argv", ["autolim", "--version"])
    with pytest.raises(SystemExit) as exc_info:
        main()
    assert exc_info.value.code == 0


# ─── limits ───────────────────────────────────────────────────────────────


def test_limits_prints_report(tmp_path, capsys):
    path = _config(tmp_path, {"command": "limits", "model": {"family": "two_state", "alpha": 1, "k": 1}})
    assert run(["limits", "--config", path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["gamma_closed"] == 1.0
    assert doc["energy_closed"] == pytest.approx(1.0)


def test_limits_writes_out_file(tmp_path, capsys):
    path = _config(tmp_path, {"model": TWO_STATE, "initial": {"x": [3.0], "y": 1.0}})
    out = tmp_path / "report.json"
    assert run(["limits", "--config", path, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["z_tilde0"] == pytest.approx(2.0)
    assert "Gamma" in capsys.readouterr().out


def test_limits_needs_config(capsys):
    assert run(["limits"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "config_error"
    assert doc["error"] == "ConfigError"


def test_config_command_must_match(tmp_path, capsys):
    path = _config(tmp_path, {"command": "sweep", "model": TWO_STATE})
    assert run(["limits", "--config", path]) == 1
    assert "config is for 'sweep'" in json.loads(capsys.readouterr().out)["message"]


def test_limits_without_unstable_mode_exits_two(tmp_path, capsys):
    path = _config(tmp_path, {"model": {
        "family": "cyclic",
        "alpha": 1,
        "nodes": [{"f": {"kind": "linear", "c": 1}, "g": {"kind": "saturating", "c": 4}}],
        "sink": {"kind": "linear", "c": 1},
        "equilibrium": [1, 1],
    }})
    assert run(["limits", "--config", path]) == 2
    captured = capsys.readouterr()
    assert json.loads(captured.out)["status"] == "hypothesis_violation"
    assert "Error:" in captured.err


def test_limits_invalid_model(tmp_path, capsys):
    path = _config(tmp_path, {"model": {"family": "two_state", "alpha": 0, "k": 1}})
    assert run(["limits", "--config", path]) == 1
    assert json.loads(capsys.readouterr().out)["status"] == "invalid_model"


# ─── sweep ────────────────────────────────────────────────────────────────


def test_sweep_writes_csv(tmp_path, capsys):
    path = _config(tmp_path, {
        "command": "sweep",
        "model": {"family": "chain", "alpha": 1, "K": 1, "n": 1, "g": 1},
        "axes": [{"name": "n", "start": 1, "stop": 5}],
    })
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--config", path, "--out", str(out)]) == 0
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "gamma_closed", "gamma_approx", "approx_rel_err",
                       "energy_coeff", "energy_coeff_approx"]
    assert len(rows) == 6
    assert float(rows[2][1]) == pytest.approx(1.0)
    assert "5 row(s)" in capsys.readouterr().out


def test_sweep_to_stdout_is_deterministic(tmp_path, capsys):
    path = _config(tmp_path, {
        "model": {"family": "two_state", "alpha": 1, "k": 1},
        "axes": [{"name": "alpha", "values": [0.5, 1, 2]}, {"name": "k", "values": [1, 2]}],
    })
    assert run(["sweep", "--config", path]) == 0
    first = capsys.readouterr().out
    assert run(["sweep", "--config", path]) == 0
    assert capsys.readouterr().out == first
    assert len(first.strip().splitlines()) == 7


def test_sweep_needs_axes(tmp_path, capsys):
    path = _config(tmp_path, {"model": TWO_STATE})
    assert run(["sweep", "--config", path]) == 1


# ─── simulate ─────────────────────────────────────────────────────────────


def test_simulate_energy_run(tmp_path, capsys):
    path = _config(tmp_path, {
        "command": "simulate",
        "model": TWO_STATE,
        "initial": {"x": [1.3], "y": 0.9},
        "controller": {"kind": "natural"},
        "horizon": {"t_end": 50, "dt": 0.01, "energy": True},
    })
    out = tmp_path / "trajectory.csv"
    assert run(["simulate", "--config", path, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["converged"] is True
    assert summary["empirical_gain"] is None
    assert summary["l2_y_dev"] >= 0.95 * summary["energy_closed"]
    assert summary["gamma_closed"] == pytest.approx(0.5)
    with open(out, newline="") as f:
        header = next(csv.reader(f))
    assert header == ["t", "x1", "y", "u", "delta"]


def test_simulate_with_disturbance_and_lqr(tmp_path, capsys):
    path = _config(tmp_path, {
        "model": {"family": "chain", "alpha": 1, "K": 1, "n": 3, "g": 0.5},
        "controller": {"kind": "lqr", "q": 1},
        "disturbance": {"kind": "sine", "amplitude": 0.05, "omega": 0.5, "stop": 40},
        "horizon": {"t_end": 80, "dt": 0.01},
    })
    assert run(["simulate", "--config", path]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["controller"]["kind"] == "linear_state_feedback"
    assert summary["empirical_gain"] > 0


def test_simulate_unstable_inhibition_reports_no_convergence(tmp_path, capsys):
    path = _config(tmp_path, {
        "model": dict(TWO_STATE, h=5),
        "initial": {"x": [1.001], "y": 1.0},
        "controller": {"kind": "natural"},
        "horizon": {"t_end": 8, "dt": 0.01},
    })
    out = tmp_path / "trajectory.csv"
    assert run(["simulate", "--config", path, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["converged"] is False
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    early = max(abs(float(r["y"]) - 1.0) for r in rows[:200])
    late = max(abs(float(r["y"]) - 1.0) for r in rows[-200:])
    assert late > 5 * early


def test_simulate_positivity_failure_exits_three(tmp_path, capsys):
    path = _config(tmp_path, {
        "model": {"family": "two_state", "alpha": 1, "k": 1},
        "initial": {"x": [1.0], "y": 1.0},
        "controller": {"kind": "constant", "value": -100},
        "horizon": {"t_end": 1, "dt": 0.01},
    })
    assert run(["simulate", "--config", path]) == 3
    assert json.loads(capsys.readouterr().out)["error"] == "PositivityError"


# ─── verify ───────────────────────────────────────────────────────────────


def test_verify_passes(tmp_path, capsys):
    path = _config(tmp_path, {"verify": {"suites": ["limits.gamma_two_state"]}})
    assert run(["verify", "--config", path, "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["seed"] == 1


def test_verify_failure_exits_four(tmp_path, capsys, monkeypatch):
    real = limits.gamma_closed_form
    monkeypatch.setattr(limits, "gamma_closed_form", lambda model: real(model) * 1.01)
    path = _config(tmp_path, {"verify": {"suites": ["limits.gamma_two_state"]}})
    assert run(["verify", "--config", path]) == 4
    captured = capsys.readouterr()
    assert json.loads(captured.out)["passed"] is False
    assert "limits.gamma_two_state" in captured.err


def test_verify_output_is_byte_identical(tmp_path, capsys):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert run(["verify", "--seed", "42", "--out", str(first)]) == 0
    assert run(["verify", "--seed", "42", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["seed"] == 42
