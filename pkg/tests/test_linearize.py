"""
Tests for autolim.linearize: Jacobians, zero coordinates, dominant mode.
"""

import numpy as np
import pytest

from autolim.errors import (
    AssumptionViolationError,
    ContractViolation,
    NoUnstableModeError,
)
from autolim.linearize import (
    closed_loop,
    cyclic_slopes,
    dominant_mode,
    jacobian_fd,
    linearize_full,
    to_zero_coordinates,
    unstable_modes,
    zero_dynamics,
)
from autolim.model import (
    ChainParams,
    CyclicNetwork,
    RateFunction,
    TwoStateParams,
    equilibrium,
    example_constant_consumption,
    linear,
    rhs,
)


def _close_to_some(values, targets, atol):
    return all(np.min(np.abs(targets - v)) < atol for v in values)


# ─── Full linearization ───────────────────────────────────────────────────


def test_two_state_plant():
    plant = linearize_full(TwoStateParams(alpha=2.0, k=1.0, g=0.5, a=1.0))
    np.testing.assert_allclose(plant.A, [[-1.0, 1.5], [3.0, -3.5]], atol=1e-12)
    np.testing.assert_allclose(plant.Bu, [1.0, -2.0])
    np.testing.assert_allclose(plant.Bd, [0.0, -1.0])
    np.testing.assert_allclose(plant.Cy, [0.0, 1.0])


def test_chain_plant_matches_finite_differences():
    model = ChainParams(alpha=1.3, K=0.9, n=5, g=0.7, a=0.4)
    plant = linearize_full(model, validate=False)
    eq = equilibrium(model)
    fd = jacobian_fd(lambda s: rhs(model, s, eq.u_star, 0.0), eq.state)
    np.testing.assert_allclose(plant.A, fd, atol=1e-6)


def test_cyclic_plant_validates():
    plant = linearize_full(example_constant_consumption(2.0, 1.5))
    assert plant.dim == 2
    np.testing.assert_allclose(plant.A, [[-1.5, 0.0], [4.5, 0.0]], atol=1e-12)


def test_jacobian_fd_of_linear_field():
    M = np.array([[1.0, 2.0], [-3.0, 0.5]])
    np.testing.assert_allclose(jacobian_fd(lambda x: M @ x, [0.3, 0.7]), M, atol=1e-8)


def test_jacobian_fd_rejects_bad_step():
    with pytest.raises(ContractViolation):
        jacobian_fd(lambda x: x, [1.0], step=0.0)


def test_closed_loop_checks_gain_length():
    plant = linearize_full(TwoStateParams(alpha=1.0, k=1.0))
    with pytest.raises(ContractViolation):
        closed_loop(plant, [1.0, 2.0, 3.0])


# ─── Zero coordinates ─────────────────────────────────────────────────────


@pytest.mark.parametrize("model", [
    TwoStateParams(alpha=1.0, k=1.0, g=1.0, a=1.0),
    TwoStateParams(alpha=0.4, k=2.5, g=0.0),
    ChainParams(alpha=1.3, K=0.9, n=2, g=0.7, a=0.4),
    ChainParams(alpha=3.0, K=2.0, n=7, g=1.5),
])
def test_zero_dynamics_match_coordinate_change(model):
    zd = zero_dynamics(model)
    numeric = to_zero_coordinates(linearize_full(model), model.alpha)
    assert numeric.control_leak < 1e-12
    np.testing.assert_allclose(zd.A, numeric.A, atol=1e-12)
    np.testing.assert_allclose(zd.B, numeric.B, atol=1e-12)
    np.testing.assert_allclose(zd.C, numeric.C, atol=1e-12)


def test_cyclic_zero_dynamics_match_coordinate_change():
    net = CyclicNetwork(
        alpha=2.0,
        nodes=(
            (linear(1.0), RateFunction("saturating", 2.0)),
            (RateFunction("power", 0.25, 2.0), linear(8.0)),
        ),
        sink=linear(1.0),
        equilibrium=(1.0, 2.0, 14.0),
    )
    zd = zero_dynamics(net)
    numeric = to_zero_coordinates(linearize_full(net), net.alpha)
    np.testing.assert_allclose(zd.A, numeric.A, atol=1e-12)
    np.testing.assert_allclose(zd.B, numeric.B, atol=1e-12)
    np.testing.assert_allclose(zd.C, numeric.C, atol=1e-12)


# ─── Dominant mode ────────────────────────────────────────────────────────


@pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
def test_chain_left_eigenvector(n):
    zd = zero_dynamics(ChainParams(alpha=0.8, K=1.7, n=n, g=0.3))
    assert zd.v_dom[0] == 1.0
    np.testing.assert_allclose(zd.v_dom @ zd.A, zd.lambda_dom * zd.v_dom, rtol=1e-10, atol=1e-10)


def test_chain_zero_dynamics_with_integer_params():
    zd = zero_dynamics(ChainParams(alpha=3, K=1, n=2))
    assert zd.A.dtype == np.float64
    assert zd.A[0, 1] == pytest.approx(4.0 / 3.0)
    np.testing.assert_allclose(zd.v_dom @ zd.A, zd.lambda_dom * zd.v_dom, atol=1e-12)


def test_chain_spectrum_matches_eigensolver():
    zd = zero_dynamics(ChainParams(alpha=1.0, K=2.0, n=9))
    computed = np.linalg.eigvals(zd.A)
    assert _close_to_some(zd.spectrum, computed, atol=1e-8)
    assert zd.lambda_dom == pytest.approx(np.max(computed.real), rel=1e-10)


def test_two_state_dominant_mode():
    mode = dominant_mode(TwoStateParams(alpha=2.0, k=3.0))
    assert mode.lam == 1.5
    assert mode.v.tolist() == [1.0]


def test_single_unstable_mode_for_moderate_chains():
    for n in (1, 2, 3, 4, 10):
        assert zero_dynamics(ChainParams(alpha=1.0, K=1.0, n=n)).unstable_count == 1


def test_several_unstable_modes_for_small_alpha():
    # rho*cos(2*pi/8) > 1 once (alpha+1)/alpha > 16
    assert zero_dynamics(ChainParams(alpha=0.05, K=1.0, n=8)).unstable_count == 3


def test_unstable_modes_are_left_eigenpairs():
    zd = zero_dynamics(ChainParams(alpha=0.05, K=1.0, n=8, g=0.2))
    lams, W = unstable_modes(zd)
    assert lams.size == 3
    assert np.all(lams.real > 0)
    np.testing.assert_allclose(W @ zd.A, lams[:, None] * W, atol=1e-9)


def test_cyclic_dominant_mode():
    net = CyclicNetwork(
        alpha=2.0,
        nodes=(
            (linear(1.0), RateFunction("saturating", 2.0)),
            (RateFunction("power", 0.25, 2.0), linear(8.0)),
        ),
        sink=linear(1.0),
        equilibrium=(1.0, 2.0, 14.0),
    )
    zd = zero_dynamics(net)
    # g' = (0.5, 8), r = sqrt(2), a = 1
    assert zd.lambda_dom == pytest.approx(np.sqrt(2.0) - 1.0, rel=1e-12)
    np.testing.assert_allclose(zd.v_dom @ zd.A, zd.lambda_dom * zd.v_dom, atol=1e-12)


def test_cyclic_slopes_rejects_unequal_f_slopes():
    net = CyclicNetwork(
        alpha=1.0,
        nodes=((linear(1.0), linear(2.0)), (linear(2.0), linear(3.0))),
        sink=linear(1.0),
        equilibrium=(1.0, 1.0, 1.0),
    )
    with pytest.raises(AssumptionViolationError):
        cyclic_slopes(net)
    with pytest.raises(AssumptionViolationError):
        zero_dynamics(net)


def test_cyclic_without_unstable_mode():
    net = CyclicNetwork(
        alpha=1.0,
        nodes=((linear(1.0), linear(0.5)),),
        sink=linear(0.25),
        equilibrium=(1.0, 1.0),
    )
    with pytest.raises(NoUnstableModeError, match="r = 0.5"):
        zero_dynamics(net)
