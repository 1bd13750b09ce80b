"""
Tests for autolim.verify: suite registry, result bookkeeping, fault injection.
"""

import numpy as np
import pytest

from autolim import limits
from autolim.config import VerifyOptions
from autolim.errors import ConfigError, NumericError
from autolim.linearize import cyclic_slopes
from autolim.model import equilibrium, two_state_stability_margin
from autolim.verify import (
    ENERGY_ALLOWANCE,
    ENERGY_DT,
    ENERGY_HORIZON,
    SuiteResult,
    random_chain,
    random_cyclic,
    run_suites,
    select_suites,
    stable_natural_two_state,
    suite_names,
)


# ─── Registry ─────────────────────────────────────────────────────────────


def test_suite_names_cover_every_module():
    names = suite_names()
    for prefix in ("model.", "linearize.", "limits.", "numerics.", "sim."):
        assert any(name.startswith(prefix) for name in names)
    assert "limits.gamma_cyclic" in names
    assert "sim.energy_bound" in names


def test_select_suites_by_prefix():
    selected = select_suites(["limits.gamma"])
    assert selected == ["limits.gamma_two_state", "limits.gamma_chain", "limits.gamma_cyclic"]


def test_select_suites_defaults_to_all():
    assert select_suites([]) == suite_names()


def test_select_suites_unknown_prefix():
    with pytest.raises(ConfigError, match="no verify suite matches"):
        select_suites(["plots"])


# ─── SuiteResult ──────────────────────────────────────────────────────────


def test_suite_result_measure():
    result = SuiteResult(name="x", tolerance=1e-6)
    result.measure(1e-8, "small")
    result.measure(1e-3, "large")
    assert result.cases == 2
    assert result.max_discrepancy == 1e-3
    assert result.failures == ["large"]
    assert not result.passed


def test_suite_result_per_case_tolerance_is_scaled():
    result = SuiteResult(name="x", tolerance=1e-9, scale=10.0)
    result.measure(5e-12, "tight", tolerance=1e-12)
    assert result.passed


def test_suite_result_nan_fails():
    result = SuiteResult(name="x", tolerance=1.0)
    result.measure(float("nan"), "nan")
    assert result.failure_count == 1


def test_suite_result_without_cases_fails():
    assert not SuiteResult(name="x", tolerance=1.0).passed


def test_suite_result_caps_failure_labels():
    result = SuiteResult(name="x", tolerance=0.0)
    for i in range(8):
        result.check(False, f"case {i}")
    assert result.failure_count == 8
    assert len(result.failures) == 5


# ─── Random cases ─────────────────────────────────────────────────────────


def test_random_chain_is_seeded():
    a = random_chain(np.random.default_rng(3), 10)
    b = random_chain(np.random.default_rng(3), 10)
    assert a == b
    assert 1 <= a.n <= 10


def test_random_cyclic_satisfies_hypotheses():
    rng = np.random.default_rng(11)
    for _ in range(10):
        net = random_cyclic(rng)
        equilibrium(net)
        a, r, _, _ = cyclic_slopes(net)
        assert r > a


def test_stable_natural_two_state_is_stable():
    rng = np.random.default_rng(5)
    for _ in range(10):
        assert two_state_stability_margin(stable_natural_two_state(rng)).stable


# ─── Runs ─────────────────────────────────────────────────────────────────


def test_run_is_deterministic():
    options = VerifyOptions(suites=("limits.gamma", "model."), seed=42)
    first = run_suites(options).to_dict()
    second = run_suites(options).to_dict()
    assert first == second
    assert first["passed"] is True


def test_report_records_energy_run_grid():
    report = run_suites(VerifyOptions(suites=("model.",), seed=42)).to_dict()
    assert report["energy_run"] == {"dt": ENERGY_DT, "t_end": ENERGY_HORIZON, "allowance": ENERGY_ALLOWANCE}
    assert report["energy_run"]["dt"] > 1e-3


def test_limits_suites_pass():
    report = run_suites(VerifyOptions(suites=("limits.",), seed=42))
    assert [s.name for s in report.suites if not s.passed] == []


def test_all_suites_pass_with_default_seed():
    report = run_suites()
    failed = {s.name: (s.failures, s.error) for s in report.suites if not s.passed}
    assert failed == {}


def test_perturbed_gamma_is_caught(monkeypatch):
    real = limits.gamma_closed_form
    monkeypatch.setattr(limits, "gamma_closed_form", lambda model: real(model) * 1.01)
    report = run_suites(VerifyOptions(suites=("limits.gamma_two_state",), seed=42))
    assert not report.passed
    assert report.suites[0].failure_count > 0


def test_suite_error_is_recorded(monkeypatch):
    def broken(zd):
        raise NumericError("solver exploded")

    monkeypatch.setattr(limits, "gamma_dominant_oracle", broken)
    report = run_suites(VerifyOptions(suites=("limits.gamma_chain",), seed=42))
    assert report.suites[0].error == "NumericError: solver exploded"
    assert not report.passed


def test_tolerance_scale_loosens_suites(monkeypatch):
    monkeypatch.setenv("AUTOLIM_TOL_SCALE", "1e6")
    real = limits.gamma_closed_form
    monkeypatch.setattr(limits, "gamma_closed_form", lambda model: real(model) * (1 + 1e-6))
    report = run_suites(VerifyOptions(suites=("limits.gamma_two_state",), seed=42))
    assert report.passed
    assert report.tol_scale == 1e6


def test_bad_tolerance_scale(monkeypatch):
    monkeypatch.setenv("AUTOLIM_TOL_SCALE", "loose")
    with pytest.raises(ConfigError, match="AUTOLIM_TOL_SCALE"):
        run_suites(VerifyOptions(suites=("model.",)))
