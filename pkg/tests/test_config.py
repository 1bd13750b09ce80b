"""
Tests for autolim.config: JSON run configs.
"""

import json

import pytest

from autolim.config import (
    HorizonSpec,
    LqrSpec,
    VerifyOptions,
    load_config,
    parse_axes,
    parse_config,
    parse_controller,
    parse_disturbance,
    parse_horizon,
    parse_model,
)
from autolim.errors import ConfigError, InvalidModelError
from autolim.model import ChainParams, CyclicNetwork, TwoStateParams
from autolim.sim import LinearStateFeedback, NaturalController, SineDisturbance, ZeroDisturbance

TWO_STATE = {"family": "two_state", "alpha": 1, "k": 1, "g": 1, "h": 3, "a": 1}


# ─── Models ───────────────────────────────────────────────────────────────


def test_parse_two_state():
    model = parse_model(TWO_STATE)
    assert model == TwoStateParams(alpha=1.0, k=1.0, g=1.0, h=3.0, a=1.0)


def test_parse_chain_defaults():
    model = parse_model({"family": "chain", "alpha": 2, "K": 0.5, "n": 4})
    assert model == ChainParams(alpha=2.0, K=0.5, n=4)


def test_parse_chain_rejects_fractional_n():
    with pytest.raises(ConfigError, match="model.n must be an integer"):
        parse_model({"family": "chain", "alpha": 2, "K": 0.5, "n": 4.5})


def test_parse_cyclic():
    model = parse_model({
        "family": "cyclic",
        "alpha": 2,
        "nodes": [{"f": {"kind": "linear", "c": 1.5}, "g": {"kind": "linear", "c": 4.5}}],
        "sink": {"kind": "power", "c": 1, "p": 0},
        "equilibrium": [0.6666666666666666, 1.0],
    })
    assert isinstance(model, CyclicNetwork)
    assert model.n == 1
    assert model.sink.p == 0.0


def test_parse_rate_rejects_p_on_linear():
    with pytest.raises(ConfigError, match="only valid for power"):
        parse_model({
            "family": "cyclic", "alpha": 1,
            "nodes": [{"f": {"kind": "linear", "c": 1, "p": 2}, "g": {"kind": "linear", "c": 2}}],
            "sink": {"kind": "linear", "c": 1}, "equilibrium": [1, 1],
        })


def test_parse_model_unknown_family():
    with pytest.raises(ConfigError, match="unknown model family"):
        parse_model({"family": "glycolysis"})


def test_parse_model_unknown_key():
    with pytest.raises(ConfigError, match="unknown key\\(s\\) in model: K"):
        parse_model({"family": "two_state", "alpha": 1, "k": 1, "K": 2})


def test_parse_model_rejects_boolean_number():
    with pytest.raises(ConfigError, match="model.alpha must be a number"):
        parse_model({"family": "two_state", "alpha": True, "k": 1})


def test_parse_model_invalid_values_surface_as_model_errors():
    with pytest.raises(InvalidModelError):
        parse_model({"family": "two_state", "alpha": -1, "k": 1})


# ─── Sections ─────────────────────────────────────────────────────────────


def test_parse_axes_values_and_range():
    axes = parse_axes([
        {"name": "alpha", "values": [0.5, 1, 2]},
        {"name": "n", "start": 1, "stop": 5, "step": 2},
    ])
    assert axes[0].values == (0.5, 1.0, 2.0)
    assert axes[1].values == (1.0, 3.0, 5.0)


def test_parse_axes_duplicate():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_axes([{"name": "n", "values": [1]}, {"name": "n", "values": [2]}])


def test_parse_axes_mixed_forms():
    with pytest.raises(ConfigError, match="either values or start/stop/step"):
        parse_axes([{"name": "n", "values": [1], "start": 1, "stop": 2}])


def test_parse_axes_names_bad_entry():
    with pytest.raises(ConfigError, match="axes\\[0\\].values\\[1\\]"):
        parse_axes([{"name": "n", "values": [1, "two"]}])


def test_parse_controllers():
    assert parse_controller({"kind": "natural"}) == NaturalController()
    feedback = parse_controller({"kind": "linear_state_feedback", "gain": [0, 2]})
    assert feedback == LinearStateFeedback(gain=(0.0, 2.0))
    assert parse_controller({"kind": "lqr", "q": 10}) == LqrSpec(q=10.0, r=1.0)


def test_parse_lqr_rejects_nonpositive_weights():
    with pytest.raises(ConfigError):
        parse_controller({"kind": "lqr", "r": 0})


def test_lqr_spec_builds_feedback():
    controller = LqrSpec().build(TwoStateParams(alpha=1.0, k=1.0, g=1.0))
    assert isinstance(controller, LinearStateFeedback)
    assert len(controller.gain) == 2


def test_parse_disturbance():
    assert parse_disturbance({"kind": "zero"}) == ZeroDisturbance()
    sine = parse_disturbance({"kind": "sine", "amplitude": 0.1, "omega": 2, "stop": 10})
    assert sine == SineDisturbance(0.1, 2.0, 0.0, 10.0)


def test_parse_disturbance_unknown_kind():
    with pytest.raises(ConfigError, match="unknown disturbance kind"):
        parse_disturbance({"kind": "noise"})


def test_parse_horizon_defaults():
    assert parse_horizon({}) == HorizonSpec(t_end=200.0, dt=1e-3, energy=False)


def test_parse_horizon_rejects_coarse_dt():
    with pytest.raises(ConfigError, match="t_end/10"):
        parse_horizon({"t_end": 1, "dt": 0.5})


def test_parse_horizon_energy_must_be_bool():
    with pytest.raises(ConfigError):
        parse_horizon({"energy": "yes"})


# ─── Whole documents ──────────────────────────────────────────────────────


def test_parse_config_defaults():
    config = parse_config({"command": "limits", "model": TWO_STATE})
    assert config.command == "limits"
    assert config.disturbance == ZeroDisturbance()
    assert config.horizon == HorizonSpec()
    assert config.verify == VerifyOptions(suites=(), seed=42)
    assert config.to_dict()["model"]["h"] == 3.0


def test_parse_config_unknown_command():
    with pytest.raises(ConfigError, match="unknown command"):
        parse_config({"command": "plot"})


def test_parse_config_unknown_section():
    with pytest.raises(ConfigError, match="unknown key\\(s\\) in config: plot"):
        parse_config({"plot": {}})


def test_require_model():
    with pytest.raises(ConfigError, match="needs a model"):
        parse_config({"command": "sweep"}).require_model()


def test_config_round_trips_through_to_dict():
    doc = {
        "command": "simulate",
        "model": {
            "family": "cyclic",
            "alpha": 2,
            "nodes": [{"f": {"kind": "linear", "c": 1.5}, "g": {"kind": "linear", "c": 4.5}}],
            "sink": {"kind": "power", "c": 1, "p": 0},
            "equilibrium": [0.6666666666666666, 1.0],
        },
        "initial": {"x": [0.7], "y": 1.1},
        "axes": [{"name": "alpha", "start": 1, "stop": 2, "step": 0.5}],
        "controller": {"kind": "lqr", "q": 4},
        "disturbance": {"kind": "sine", "amplitude": 0.1, "omega": 2, "stop": 10},
        "horizon": {"t_end": 50, "dt": 0.01, "energy": True},
        "out": "trajectory.csv",
        "verify": {"suites": ["sim"], "seed": 3},
    }
    config = parse_config(doc)
    again = parse_config(json.loads(json.dumps(config.to_dict())))
    assert again == config
    assert again.to_dict() == config.to_dict()


def test_config_round_trip_keeps_default_offset():
    config = parse_config({
        "model": {"family": "chain", "alpha": 1, "K": 1, "n": 3},
        "controller": {"kind": "linear_state_feedback", "gain": [0, 0, 0, 1]},
        "disturbance": {"kind": "pulse", "magnitude": 0.01, "stop": 2},
    })
    assert config.controller.offset is None
    assert parse_config(config.to_dict()) == config


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"command": "verify", "verify": {"suites": ["limits"], "seed": 7}}))
    config = load_config(path)
    assert config.verify == VerifyOptions(suites=("limits",), seed=7)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "missing.json")


def test_load_config_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path)
