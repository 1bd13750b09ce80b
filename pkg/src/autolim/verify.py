"""
Property suites behind ``autolim verify``.

Each suite draws its cases from ``numpy.random.default_rng(seed)`` and
compares a closed form against an independent computation. A suite records
the worst discrepancy it saw and the labels of failing cases; the report
carries no timings so identical seeds give identical output.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from autolim import limits
from autolim.config import VerifyOptions
from autolim.errors import AutolimError, ConfigError
from autolim.linearize import (
    LinearPlant,
    jacobian_fd,
    linearize_full,
    to_zero_coordinates,
    zero_dynamics,
)
from autolim.model import (
    ChainParams,
    CyclicNetwork,
    RateFunction,
    TwoStateParams,
    equilibrium,
    example_constant_consumption,
    example_linear_consumption,
    linear,
    rhs,
    two_state_stability_margin,
    vector_field,
)
from autolim.numerics import cheap_cost, hinf_norm, is_hurwitz, lyapunov_solve
from autolim.sim import (
    NaturalController,
    controller_gain,
    energy_run,
    integrate,
    lqr_controller,
    ZeroDisturbance,
    stability_boundary_probe,
)
from autolim.tolerances import TOLERANCES, tolerance_scale

logger = logging.getLogger(__name__)

ENERGY_DT = 0.02
ENERGY_HORIZON = 100.0
ENERGY_ALLOWANCE = 0.95
CHEAP_EPSILONS = (1e-1, 1e-2, 1e-3, 1e-4)
CHEAP_ALLOWANCE = 0.01
MAX_FAILURE_LABELS = 5


# ─── Results ───────────────────────────────────────────────────────────────

@dataclass
class SuiteResult:
    name: str
    tolerance: float
    scale: float = 1.0
    cases: int = 0
    max_discrepancy: float = 0.0
    failures: List[str] = field(default_factory=list)
    failure_count: int = 0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.failure_count == 0 and self.cases > 0

    def measure(self, discrepancy: float, label: str, tolerance: Optional[float] = None) -> None:
        """Record one case; it fails when the discrepancy exceeds the tolerance.

        A per-case ``tolerance`` is scaled like the suite-wide one.
        """
        self.cases += 1
        if not math.isfinite(discrepancy):
            discrepancy = math.inf
        self.max_discrepancy = max(self.max_discrepancy, discrepancy)
        limit = self.tolerance if tolerance is None else tolerance * self.scale
        if discrepancy > limit:
            self._fail(label)

    def check(self, ok: bool, label: str) -> None:
        self.cases += 1
        if not ok:
            self._fail(label)

    def _fail(self, label: str) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_FAILURE_LABELS:
            self.failures.append(label)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "max_discrepancy": self.max_discrepancy,
            "tolerance": self.tolerance,
            "failure_count": self.failure_count,
            "failures": list(self.failures),
            "error": self.error,
        }


@dataclass
class VerifyReport:
    seed: int
    tol_scale: float
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "tol_scale": self.tol_scale,
            # sim.energy_bound runs on this coarser grid, not the 1e-3 simulate default
            "energy_run": {"dt": ENERGY_DT, "t_end": ENERGY_HORIZON, "allowance": ENERGY_ALLOWANCE},
            "suites": [s.to_dict() for s in self.suites],
        }


Suite = Callable[[np.random.Generator, SuiteResult], None]
_SUITES: Dict[str, Tuple[Suite, float]] = {}


def suite(name: str, tolerance: float = 0.0):
    """Register a suite. ``tolerance`` is scaled by AUTOLIM_TOL_SCALE."""
    def register(fn: Suite) -> Suite:
        _SUITES[name] = (fn, tolerance)
        return fn
    return register


def suite_names() -> List[str]:
    return list(_SUITES)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), TOLERANCES.discrepancy_floor)


# ─── Random cases ──────────────────────────────────────────────────────────

def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_two_state(rng: np.random.Generator) -> TwoStateParams:
    return TwoStateParams(
        alpha=_log_uniform(rng, 0.25, 8.0),
        k=_log_uniform(rng, 0.1, 10.0),
        g=float(rng.uniform(0.0, 5.0)),
        a=float(rng.uniform(0.0, 2.0)),
    )


def random_chain(rng: np.random.Generator, n_max: int) -> ChainParams:
    return ChainParams(
        alpha=_log_uniform(rng, 0.25, 8.0),
        K=_log_uniform(rng, 0.1, 10.0),
        n=int(rng.integers(1, n_max + 1)),
        g=float(rng.uniform(0.0, 5.0)),
        a=float(rng.uniform(0.0, 2.0)),
    )


def stable_natural_two_state(rng: np.random.Generator) -> TwoStateParams:
    """Two-state model whose natural loop sits inside the stability window."""
    p = TwoStateParams(
        alpha=_log_uniform(rng, 0.5, 4.0),
        k=_log_uniform(rng, 0.5, 3.0),
        g=float(rng.uniform(0.0, 2.0)),
        a=float(rng.uniform(0.0, 1.0)),
    )
    upper = two_state_stability_margin(p).upper
    return dataclasses.replace(p, h=p.a + float(rng.uniform(0.3, 0.7)) * upper)


def _rate_through(rng: np.random.Generator, x: float, value: float) -> RateFunction:
    """A random catalog rate passing through (x, value)."""
    kind = rng.choice(["linear", "saturating", "power"])
    if kind == "linear":
        return RateFunction("linear", value / x)
    if kind == "saturating":
        return RateFunction("saturating", value * (1.0 + x) / x)
    p = float(rng.uniform(0.5, 2.0))
    return RateFunction("power", value / x ** p, p)


def _rate_with_slope(rng: np.random.Generator, x: float, slope: float) -> RateFunction:
    """A random catalog rate with derivative ``slope`` at x."""
    kind = rng.choice(["linear", "saturating", "power"])
    if kind == "linear":
        return RateFunction("linear", slope)
    if kind == "saturating":
        return RateFunction("saturating", slope * (1.0 + x) ** 2)
    p = float(rng.uniform(0.5, 2.0))
    return RateFunction("power", slope / (p * x ** (p - 1.0)), p)


def random_cyclic(rng: np.random.Generator, n_max: int = 5, attempts: int = 200) -> CyclicNetwork:
    """Cyclic network from the rate catalog with a shared f_i' and r > a."""
    for _ in range(attempts):
        n = int(rng.integers(1, n_max + 1))
        alpha = _log_uniform(rng, 0.25, 4.0)
        a = _log_uniform(rng, 0.2, 2.0)
        xs = [float(rng.uniform(0.5, 3.0)) for _ in range(n)]
        y_star = float(rng.uniform(0.5, 2.0))
        fs = [_rate_with_slope(rng, x, a) for x in xs]
        sink = linear(_log_uniform(rng, 0.1, 2.0)) if rng.random() < 0.5 else RateFunction("power", 1.0, 0.0)
        gs = [_rate_through(rng, xs[i], fs[i + 1](xs[i + 1])) for i in range(n - 1)]
        gs.append(_rate_through(rng, xs[-1], sink(y_star) + alpha * fs[0](xs[0])))
        net = CyclicNetwork(alpha=alpha, nodes=tuple(zip(fs, gs)), sink=sink,
                            equilibrium=tuple(xs + [y_star]))
        _, g_prime, _ = net.slopes()
        if (np.prod(g_prime) / alpha) ** (1.0 / n) > a * 1.01:
            return net
    raise AutolimError("could not draw a cyclic network with r > a")


# ─── model ─────────────────────────────────────────────────────────────────

@suite("model.equilibrium", tolerance=TOLERANCES.equilibrium_residual)
def _equilibrium_fixed_point(rng, result):
    for i in range(20):
        for model in (random_two_state(rng), random_chain(rng, 10)):
            eq = equilibrium(model)
            residual = np.max(np.abs(vector_field(model, eq.state, eq.u_star, 0.0)))
            result.measure(float(residual), f"{model.family}#{i}")


@suite("model.control_affine", tolerance=1e-12)
def _control_affine(rng, result):
    for i in range(20):
        for model in (random_two_state(rng), random_chain(rng, 10), random_cyclic(rng)):
            state = equilibrium(model).state * rng.uniform(0.5, 1.5, model.state_dim)
            f = [vector_field(model, state, u, 0.3) for u in (0.0, 1.0, 2.0)]
            scale = max(1.0, float(np.max(np.abs(f))))
            err = np.max(np.abs((f[2] - f[0]) - 2.0 * (f[1] - f[0]))) / scale
            result.measure(float(err), f"{model.family}#{i}")


@suite("model.zero_drift", tolerance=1e-12)
def _zero_drift(rng, result):
    for i in range(20):
        for model in (random_two_state(rng), random_chain(rng, 10)):
            state = equilibrium(model).state * rng.uniform(0.2, 2.0, model.state_dim)
            rates = []
            for u in (0.0, 1.0):
                f = vector_field(model, state, u, 0.0)
                rates.append(f[0] + f[-1] / model.alpha)
            scale = max(1.0, abs(rates[0]))
            result.measure(abs(rates[1] - rates[0]) / scale, f"{model.family}#{i}")


@suite("model.disturbance_channel", tolerance=1e-12)
def _disturbance_channel(rng, result):
    for i in range(20):
        for model in (random_two_state(rng), random_chain(rng, 10), random_cyclic(rng)):
            eq = equilibrium(model)
            diff = vector_field(model, eq.state, eq.u_star, 1.0) - vector_field(model, eq.state, eq.u_star, 0.0)
            expected = np.zeros(model.state_dim)
            expected[-1] = -1.0
            result.measure(float(np.max(np.abs(diff - expected))), f"{model.family}#{i}")


# ─── linearize ─────────────────────────────────────────────────────────────

@suite("linearize.eigenpair", tolerance=TOLERANCES.eigen_residual)
def _eigenpair(rng, result):
    for i in range(60):
        p = random_chain(rng, 40)
        zd = zero_dynamics(p)
        v = zd.v_dom
        result.measure(float(np.max(np.abs(v @ zd.A - zd.lambda_dom * v))), f"chain#{i} n={p.n}")
        rho_n = (p.alpha + 1.0) / p.alpha
        char = np.abs((zd.spectrum + p.K) ** p.n - rho_n * p.K ** p.n) / (p.K ** p.n)
        result.measure(float(np.max(char)), f"chain#{i} characteristic", tolerance=1e-8)
        others = zd.spectrum.real[1:]
        result.check(bool(np.all(others < zd.lambda_dom)), f"chain#{i} dominance")
    for i in range(20):
        net = random_cyclic(rng)
        zd = zero_dynamics(net)
        v = zd.v_dom
        scale = max(1.0, float(np.max(np.abs(zd.A))))
        result.measure(float(np.max(np.abs(v @ zd.A - zd.lambda_dom * v))) / scale, f"cyclic#{i}")


def _fd_plant(model) -> LinearPlant:
    eq = equilibrium(model)
    state, u_star = eq.state, eq.u_star
    A = jacobian_fd(lambda s: rhs(model, s, u_star, 0.0), state)
    Bu = jacobian_fd(lambda w: rhs(model, state, w[0], 0.0), [u_star])[:, 0]
    Bd = jacobian_fd(lambda w: rhs(model, state, u_star, w[0]), [0.0])[:, 0]
    Cy = np.zeros(model.state_dim)
    Cy[-1] = 1.0
    return LinearPlant(A=A, Bu=Bu, Bd=Bd, Cy=Cy)


@suite("linearize.finite_differences", tolerance=TOLERANCES.jacobian_match)
def _zero_dynamics_vs_fd(rng, result):
    for i in range(30):
        for model in (random_two_state(rng), random_chain(rng, 8)):
            zd = zero_dynamics(model)
            numeric = to_zero_coordinates(_fd_plant(model), model.alpha)
            scale = max(1.0, float(np.max(np.abs(zd.A))))
            err = max(
                float(np.max(np.abs(zd.A - numeric.A))),
                float(np.max(np.abs(zd.B - numeric.B))),
                float(np.max(np.abs(zd.C - numeric.C))),
                numeric.control_leak,
            ) / scale
            result.measure(err, f"{model.family}#{i}")


# ─── limits ────────────────────────────────────────────────────────────────

@suite("limits.gamma_two_state", tolerance=1e-9)
def _gamma_two_state(rng, result):
    for i in range(200):
        p = random_two_state(rng)
        closed = limits.gamma_closed_form(p)
        result.measure(_rel(closed, limits.gamma_dominant_oracle(zero_dynamics(p))), f"two_state#{i}")


@suite("limits.gamma_chain", tolerance=1e-9)
def _gamma_chain(rng, result):
    for i in range(200):
        p = random_chain(rng, 25)
        closed = limits.gamma_closed_form(p)
        result.measure(_rel(closed, limits.gamma_dominant_oracle(zero_dynamics(p))), f"chain#{i} n={p.n}")
    for i in range(20):
        t = random_two_state(rng)
        c = ChainParams(alpha=t.alpha, K=t.k, n=1, g=t.g, a=t.a)
        result.measure(_rel(limits.gamma_closed_form(t), limits.gamma_closed_form(c)),
                       f"reduction#{i}", tolerance=1e-12)
    exact = limits.gamma_closed_form(ChainParams(alpha=1.0, K=1.0, n=2, g=1.0))
    result.measure(abs(exact - 1.0), "alpha=K=g=1,n=2", tolerance=1e-12)


@suite("limits.gamma_cyclic", tolerance=1e-9)
def _gamma_cyclic(rng, result):
    grid = (0.5, 1.0, 2.0, 3.0, 5.0)
    for alpha in grid:
        for k in grid:
            result.measure(
                _rel(alpha / k, limits.gamma_closed_form(example_constant_consumption(alpha, k))),
                f"constant alpha={alpha} k={k}",
                tolerance=1e-12,
            )
            for k_y in grid:
                net = example_linear_consumption(alpha, k, k_y)
                expected = alpha / (k + alpha * k_y)
                result.measure(_rel(expected, limits.gamma_closed_form(net)),
                               f"linear alpha={alpha} k={k} k_y={k_y}", tolerance=1e-12)
    for i in range(200):
        net = random_cyclic(rng)
        closed = limits.gamma_closed_form(net)
        result.measure(_rel(closed, limits.gamma_dominant_oracle(zero_dynamics(net))), f"cyclic#{i} n={net.n}")


@suite("limits.energy_oracle", tolerance=1e-9)
def _energy_oracle(rng, result):
    for i in range(200):
        for model in (random_two_state(rng), random_chain(rng, 25)):
            zd = zero_dynamics(model)
            eq = equilibrium(model)
            # v-aligned deviation, small enough to stay nonnegative
            s = float(rng.uniform(-0.5, 0.5)) * float(np.min(eq.x_star))
            x0 = eq.x_star + s * zd.v_dom / float(zd.v_dom @ zd.v_dom)
            closed = limits.energy_closed_form(model, x0, eq.y_star)
            zbar = x0 - eq.x_star
            oracle = limits.energy_oracle(zd, zbar)
            result.measure(_rel(closed.H, oracle), f"{model.family}#{i}")
            at_rest = limits.energy_closed_form(model, eq.x_star, eq.y_star)
            result.check(at_rest.H == 0.0, f"{model.family}#{i} equilibrium")


@suite("limits.monotonicity")
def _monotonicity(rng, result):
    for i in range(10):
        k, g = _log_uniform(rng, 0.1, 10.0), float(rng.uniform(0.0, 5.0))
        gammas = [limits.gamma_closed_form(TwoStateParams(alpha=a, k=k, g=g))
                  for a in np.linspace(0.25, 8.0, 32)]
        result.check(bool(np.all(np.diff(gammas) > 0)), f"alpha grid#{i}")
        alpha, K = _log_uniform(rng, 0.25, 8.0), _log_uniform(rng, 0.1, 10.0)
        gammas = [limits.gamma_closed_form(ChainParams(alpha=alpha, K=K, n=n, g=g)) for n in range(1, 41)]
        result.check(bool(np.all(np.diff(gammas) > 0)), f"n grid#{i}")


@suite("limits.large_n", tolerance=0.02)
def _large_n(rng, result):
    for alpha in np.linspace(0.5, 4.0, 8):
        for K in (0.5, 1.0, 2.0):
            for g in (0.0, 0.5, 1.0, 3.0):
                ns = (20, 30, 40, 60) if alpha >= 1.0 else (30, 40, 60)
                for n in ns:
                    p = ChainParams(alpha=float(alpha), K=K, n=n, g=g)
                    exact = limits.gamma_closed_form(p)
                    result.measure(_rel(exact, limits.approximations(p).gamma_approx),
                                   f"alpha={alpha:g} K={K} g={g} n={n}")
    base = ChainParams(alpha=1.0, K=1.0, n=20, g=1.0)
    ratio = limits.gamma_closed_form(ChainParams(alpha=1.0, K=1.0, n=40, g=1.0)) / limits.gamma_closed_form(base)
    result.check(1.9 <= ratio <= 2.1, f"gamma(40)/gamma(20) = {ratio:.4f}")


# ─── numerics ──────────────────────────────────────────────────────────────

@suite("numerics.lyapunov", tolerance=TOLERANCES.lyapunov_residual)
def _lyapunov(rng, result):
    for i in range(15):
        p = random_chain(rng, 30)
        zd = zero_dynamics(p)
        A = zd.A - (zd.lambda_dom + float(rng.uniform(0.1, 1.0))) * np.eye(zd.dim)
        Q = np.eye(zd.dim)
        P = lyapunov_solve(A, Q)
        residual = np.linalg.norm(A.T @ P + P @ A + Q) / np.linalg.norm(Q)
        result.measure(float(residual), f"chain#{i} n={p.n}")


@suite("numerics.min_energy", tolerance=1e-6)
def _min_energy(rng, result):
    for i in range(20):
        p = random_chain(rng, 12)
        zd = zero_dynamics(p)
        P = limits.min_energy_riccati(zd).P
        for _ in range(3):
            zbar = rng.normal(size=zd.dim)
            oracle = limits.energy_oracle(zd, zbar)
            result.check(0.5 * zbar @ P @ zbar >= oracle - 1e-9, f"chain#{i} lower bound")
        if zd.unstable_count == 1:
            zbar = zd.v_dom / float(zd.v_dom @ zd.v_dom)
            result.measure(_rel(limits.energy_oracle(zd, zbar), 0.5 * zbar @ P @ zbar), f"chain#{i} aligned")


@suite("numerics.cheap_control")
def _cheap_control(rng, result):
    for i in range(8):
        for model in (
            TwoStateParams(alpha=_log_uniform(rng, 0.5, 4.0), k=_log_uniform(rng, 0.5, 3.0),
                           g=float(rng.uniform(0.0, 2.0)), a=float(rng.uniform(0.0, 1.0))),
            ChainParams(alpha=_log_uniform(rng, 0.5, 4.0), K=_log_uniform(rng, 0.5, 3.0),
                        n=int(rng.integers(2, 7)), g=float(rng.uniform(0.0, 2.0)),
                        a=float(rng.uniform(0.0, 1.0))),
        ):
            plant = linearize_full(model)
            eq = equilibrium(model)
            x0 = eq.x_star.copy()
            x0[0] += 1.0
            H = limits.energy_closed_form(model, x0, eq.y_star).H
            xbar0 = np.zeros(plant.dim)
            xbar0[0] = 1.0
            costs = [cheap_cost(plant, eps, xbar0) for eps in CHEAP_EPSILONS]
            label = f"{model.family}#{i}"
            result.check(all(b <= a * (1 + 1e-9) for a, b in zip(costs, costs[1:])), f"{label} monotone")
            result.check(H * (1 - 1e-6) <= costs[-1] <= H * (1 + CHEAP_ALLOWANCE), f"{label} limit")


@suite("numerics.hinf_symmetry", tolerance=1e-9)
def _hinf_symmetry(rng, result):
    for i in range(10):
        p = stable_natural_two_state(rng)
        plant = linearize_full(p)
        A = plant.A - np.outer(plant.Bu, controller_gain(NaturalController(), p))
        forward = hinf_norm(A, plant.Bd, plant.Cy).norm
        backward = hinf_norm(A.T, plant.Cy, plant.Bd).norm
        result.measure(_rel(forward, backward), f"two_state#{i}")


def _loop_controllers(model):
    controllers = [("lqr q=1", lqr_controller(model, 1.0)), ("lqr q=10", lqr_controller(model, 10.0))]
    if isinstance(model, TwoStateParams):
        controllers.insert(0, ("natural", NaturalController()))
    return controllers


@suite("numerics.hinf_lower_bound")
def _hinf_lower_bound(rng, result):
    for i in range(50):
        model = stable_natural_two_state(rng) if i % 2 == 0 else ChainParams(
            alpha=_log_uniform(rng, 0.5, 4.0), K=_log_uniform(rng, 0.5, 3.0),
            n=int(rng.integers(2, 7)), g=float(rng.uniform(0.0, 2.0)), a=float(rng.uniform(0.0, 1.0)))
        gamma = limits.gamma_closed_form(model)
        plant = linearize_full(model)
        for name, controller in _loop_controllers(model):
            A = plant.A - np.outer(plant.Bu, controller_gain(controller, model))
            if not is_hurwitz(A):
                result.check(False, f"{model.family}#{i} {name} not stabilizing")
                continue
            norm = hinf_norm(A, plant.Bd, plant.Cy).norm
            result.measure(max(0.0, gamma - norm), f"{model.family}#{i} {name}")


# ─── sim ───────────────────────────────────────────────────────────────────

@suite("sim.energy_bound")
def _energy_bound(rng, result):
    for i in range(20):
        for model in (stable_natural_two_state(rng),
                      ChainParams(alpha=_log_uniform(rng, 0.5, 4.0), K=_log_uniform(rng, 0.5, 3.0),
                                  n=int(rng.integers(2, 11)), g=float(rng.uniform(0.0, 2.0)),
                                  a=float(rng.uniform(0.0, 1.0)))):
            eq = equilibrium(model)
            x0 = eq.state * (1.0 + rng.uniform(-0.3, 0.3, model.state_dim))
            H = limits.energy_closed_form(model, x0[:-1], x0[-1]).H
            if H == 0.0:
                continue
            if isinstance(model, TwoStateParams) and i % 2 == 0:
                name, controller = "natural", NaturalController()
            else:
                name, controller = "lqr", lqr_controller(model)
            traj = energy_run(model, controller, x0, t_end=ENERGY_HORIZON, dt=ENERGY_DT)
            result.measure(max(0.0, ENERGY_ALLOWANCE * H - traj.l2_y_dev) / H,
                           f"{model.family}#{i} {name}")


@suite("sim.stability_window", tolerance=0.05)
def _stability_window(rng, result):
    for i in range(10):
        p = stable_natural_two_state(rng)
        upper = two_state_stability_margin(p).upper
        expected = p.a + upper
        found = stability_boundary_probe(p, (p.a + 0.5 * upper, p.a + 2.0 * upper))
        result.measure(abs(found - expected), f"two_state#{i}")


@suite("sim.convergence_order")
def _convergence_order(rng, result):
    model = TwoStateParams(alpha=1.0, k=1.0, g=1.0, h=3.0, a=1.0)
    x0 = np.array([2.0, 1.0])

    def end(dt):
        return integrate(model, NaturalController(), ZeroDisturbance(), x0, 5.0, dt).states[-1]

    reference = end(0.1 / 8)
    coarse = np.max(np.abs(end(0.1) - reference))
    fine = np.max(np.abs(end(0.05) - reference))
    ratio = coarse / fine
    result.check(10.0 <= ratio <= 24.0, f"error ratio {ratio:.2f}")


@suite("sim.zero_drift", tolerance=1e-12)
def _trajectory_zero_drift(rng, result):
    model = TwoStateParams(alpha=1.0, k=1.0, g=1.0, h=3.0, a=1.0)
    traj = integrate(model, NaturalController(), ZeroDisturbance(), [2.0, 1.0], 10.0, 0.01)
    for j in range(0, len(traj.t), 50):
        state = traj.states[j]
        rates = []
        for du in (0.0, float(rng.uniform(-0.5, 0.5))):
            f = vector_field(model, state, traj.u[j] + du, 0.0)
            rates.append(f[0] + f[-1] / model.alpha)
        result.measure(abs(rates[1] - rates[0]) / max(1.0, abs(rates[0])), f"t={traj.t[j]:g}")


# ─── Runner ────────────────────────────────────────────────────────────────

def select_suites(prefixes) -> List[str]:
    if not prefixes:
        return suite_names()
    selected = [name for name in _SUITES if any(name.startswith(p) for p in prefixes)]
    if not selected:
        raise ConfigError(
            f"no verify suite matches {', '.join(prefixes)} (known: {', '.join(_SUITES)})"
        )
    return selected


def run_suites(options: VerifyOptions = VerifyOptions()) -> VerifyReport:
    scale = tolerance_scale()
    results = []
    for name in select_suites(options.suites):
        fn, tolerance = _SUITES[name]
        result = SuiteResult(name=name, tolerance=tolerance * scale, scale=scale)
        logger.debug("running suite %s", name)
        try:
            fn(np.random.default_rng(options.seed), result)
        except AutolimError as e:
            result.error = f"{type(e).__name__}: {e}"
        logger.debug("suite %s: %d cases, passed=%s", name, result.cases, result.passed)
        results.append(result)
    return VerifyReport(seed=options.seed, tol_scale=scale, suites=results)
