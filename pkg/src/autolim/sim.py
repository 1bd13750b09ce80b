"""
Nonlinear simulation of the pathway models.

Integration is classical fixed-step RK4 so that grids, and with them the
trapezoid functionals, are reproducible. States must stay in the
nonnegative orthant: small rounding excursions are snapped back to zero,
anything larger aborts the run.
"""

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize
from scipy.integrate import trapezoid

from autolim.errors import (
    BlowUpError,
    BracketError,
    ContractViolation,
    DomainError,
    PositivityError,
    TruncationError,
    UndefinedRatioError,
    UnsupportedOperationError,
)
from autolim.linearize import closed_loop, linearize_full
from autolim.model import (
    CyclicNetwork,
    PathwayModel,
    TwoStateParams,
    equilibrium,
    natural_control,
    rhs,
)
from autolim.numerics import riccati_solve
from autolim.tolerances import TOLERANCES

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_ENERGY_HORIZON = 200.0


def _finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ContractViolation(f"{name} must be finite, got {value}")


# ─── Disturbances ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ZeroDisturbance:
    kind: ClassVar[str] = "zero"

    def __call__(self, t: float) -> float:
        return 0.0

    def to_dict(self) -> Dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class StepDisturbance:
    kind: ClassVar[str] = "step"

    magnitude: float
    onset: float = 0.0

    def __post_init__(self):
        _finite(magnitude=self.magnitude, onset=self.onset)

    def __call__(self, t: float) -> float:
        return self.magnitude if t >= self.onset else 0.0

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "magnitude": self.magnitude, "onset": self.onset}


@dataclass(frozen=True)
class SineDisturbance:
    """amplitude*sin(omega*(t - start)) on [start, stop), zero elsewhere."""

    kind: ClassVar[str] = "sine"

    amplitude: float
    omega: float
    start: float
    stop: float

    def __post_init__(self):
        _finite(amplitude=self.amplitude, omega=self.omega, start=self.start, stop=self.stop)
        if not self.stop > self.start:
            raise ContractViolation(f"sine stop ({self.stop}) must be after start ({self.start})")

    def __call__(self, t: float) -> float:
        if self.start <= t < self.stop:
            return self.amplitude * math.sin(self.omega * (t - self.start))
        return 0.0

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "amplitude": self.amplitude, "omega": self.omega,
                "start": self.start, "stop": self.stop}


@dataclass(frozen=True)
class PulseDisturbance:
    kind: ClassVar[str] = "pulse"

    magnitude: float
    start: float
    stop: float

    def __post_init__(self):
        _finite(magnitude=self.magnitude, start=self.start, stop=self.stop)
        if not self.stop > self.start:
            raise ContractViolation(f"pulse stop ({self.stop}) must be after start ({self.start})")

    def __call__(self, t: float) -> float:
        return self.magnitude if self.start <= t < self.stop else 0.0

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "magnitude": self.magnitude, "start": self.start, "stop": self.stop}


DisturbanceSpec = Union[ZeroDisturbance, StepDisturbance, SineDisturbance, PulseDisturbance]


# ─── Controllers ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NaturalController:
    """The pathway's own inhibition law u = 2/(1+y^(2h))."""

    kind: ClassVar[str] = "natural"

    def control(self, model: PathwayModel, state: np.ndarray) -> float:
        return natural_control(model, state[-1])

    def to_dict(self) -> Dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ConstantController:
    kind: ClassVar[str] = "constant"

    value: float

    def __post_init__(self):
        _finite(value=self.value)

    def control(self, model: PathwayModel, state: np.ndarray) -> float:
        return self.value

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class LinearStateFeedback:
    """u = offset - gain.(state - state*); offset defaults to u*."""

    kind: ClassVar[str] = "linear_state_feedback"

    gain: Tuple[float, ...]
    offset: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "gain", tuple(float(v) for v in self.gain))
        for i, v in enumerate(self.gain):
            if not math.isfinite(v):
                raise ContractViolation(f"gain[{i}] must be finite, got {v}")
        if self.offset is not None:
            _finite(offset=self.offset)

    def control(self, model: PathwayModel, state: np.ndarray) -> float:
        eq = equilibrium(model)
        gain = np.asarray(self.gain)
        if gain.shape != state.shape:
            raise ContractViolation(
                f"gain has {gain.size} entries, expected {state.size} for {model.family}"
            )
        offset = eq.u_star if self.offset is None else self.offset
        return float(offset - gain @ (state - eq.state))

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "gain": list(self.gain), "offset": self.offset}


ControllerSpec = Union[NaturalController, ConstantController, LinearStateFeedback]


def lqr_controller(model: PathwayModel, q: float = 1.0, r: float = 1.0) -> LinearStateFeedback:
    """LQR state feedback on the linearized plant with Q = q*I, R = r."""
    if not q > 0:
        raise ContractViolation(f"q must be positive, got {q}")
    plant = linearize_full(model)
    solution = riccati_solve(plant.A, plant.Bu, q * np.eye(plant.dim), r)
    return LinearStateFeedback(gain=tuple(solution.gain.reshape(-1)))


def controller_gain(controller: ControllerSpec, model: PathwayModel) -> np.ndarray:
    """Feedback row k of the linearized controller, u - u* = -k.(state - state*)."""
    dim = model.state_dim
    if isinstance(controller, NaturalController):
        if isinstance(model, CyclicNetwork):
            raise UnsupportedOperationError("the natural controller needs a model with h")
        # du/dy = -h at y = 1
        gain = np.zeros(dim)
        gain[-1] = model.h
        return gain
    if isinstance(controller, ConstantController):
        return np.zeros(dim)
    gain = np.asarray(controller.gain, dtype=float)
    if gain.shape != (dim,):
        raise ContractViolation(f"gain has {gain.size} entries, expected {dim}")
    return gain


def linear_closed_loop(model: PathwayModel, controller: ControllerSpec) -> np.ndarray:
    return closed_loop(linearize_full(model), controller_gain(controller, model))


# ─── Integration ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    u: np.ndarray
    delta: np.ndarray
    y_star: float
    l2_y_dev: float
    l2_delta: float
    converged: bool

    @property
    def x(self) -> np.ndarray:
        return self.states[:, :-1]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, -1]

    def tail_energy(self, fraction: float = TOLERANCES.tail_fraction) -> float:
        """Trapezoid integral of (y - y*)^2 over the last ``fraction`` of the horizon."""
        start = int(len(self.t) * (1.0 - fraction))
        return float(trapezoid((self.y[start:] - self.y_star) ** 2, self.t[start:]))


def integrate(model: PathwayModel, controller: ControllerSpec, dist: DisturbanceSpec,
              x0, t_end: float, dt: float = DEFAULT_DT) -> Trajectory:
    """Fixed-step RK4 from the full initial state ``x0`` over [0, t_end]."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.state_dim,):
        raise ContractViolation(f"x0 has shape {x0.shape}, expected ({model.state_dim},)")
    negative = np.flatnonzero(x0 < 0)
    if negative.size:
        raise DomainError(f"x0[{int(negative[0])}] = {x0[negative[0]]!r} is negative")
    if not (t_end > 0 and dt > 0):
        raise ContractViolation(f"t_end and dt must be positive, got {t_end}, {dt}")
    if dt > t_end / 10.0:
        raise ContractViolation(f"dt = {dt} is too coarse for t_end = {t_end} (need dt <= t_end/10)")

    eq = equilibrium(model)
    steps = int(round(t_end / dt))
    t = np.arange(steps + 1) * dt
    states = np.empty((steps + 1, model.state_dim))
    u = np.empty(steps + 1)
    delta = np.empty(steps + 1)
    snap = TOLERANCES.positivity_snap

    def field(time: float, s: np.ndarray) -> np.ndarray:
        low = np.flatnonzero(s < -snap)
        if low.size:
            raise PositivityError(time, int(low[0]), float(s[low[0]]))
        # same snap as after a full step
        s = np.where(s < 0, 0.0, s)
        return rhs(model, s, controller.control(model, s), dist(time))

    state = x0.copy()
    for i in range(steps):
        ti = t[i]
        states[i] = state
        u[i] = controller.control(model, state)
        delta[i] = dist(ti)
        k1 = field(ti, state)
        k2 = field(ti + dt / 2, state + 0.5 * dt * k1)
        k3 = field(ti + dt / 2, state + 0.5 * dt * k2)
        k4 = field(ti + dt, state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise BlowUpError(t[i + 1])
        low = np.flatnonzero(state < -snap)
        if low.size:
            raise PositivityError(t[i + 1], int(low[0]), float(state[low[0]]))
        state[state < 0] = 0.0
    states[steps] = state
    u[steps] = controller.control(model, state)
    delta[steps] = dist(t[steps])

    y_dev = states[:, -1] - eq.y_star
    traj = Trajectory(
        t=t,
        states=states,
        u=u,
        delta=delta,
        y_star=eq.y_star,
        l2_y_dev=float(trapezoid(y_dev ** 2, t)),
        l2_delta=float(trapezoid(delta ** 2, t)),
        converged=bool(np.max(np.abs(state - eq.state)) <= TOLERANCES.converged),
    )
    logger.debug(
        "integrated %s over %g with %d steps: l2_y_dev=%.6g converged=%s",
        model.family, t_end, steps, traj.l2_y_dev, traj.converged,
    )
    return traj


def empirical_gain(traj: Trajectory) -> float:
    """sqrt(int (y - y*)^2 / int delta^2)."""
    if not traj.l2_delta > 0:
        raise UndefinedRatioError("the disturbance carries no energy; the gain ratio is undefined")
    return math.sqrt(traj.l2_y_dev / traj.l2_delta)


def energy_run(model: PathwayModel, controller: ControllerSpec, x0,
               t_end: float = DEFAULT_ENERGY_HORIZON, dt: float = DEFAULT_DT) -> Trajectory:
    """Undisturbed run whose horizon doubles until the output energy has settled."""
    horizon = t_end
    for doubling in range(TOLERANCES.max_horizon_doublings + 1):
        traj = integrate(model, controller, ZeroDisturbance(), x0, horizon, dt)
        tail = traj.tail_energy()
        if traj.converged and tail <= TOLERANCES.tail_energy_ratio * traj.l2_y_dev:
            return traj
        if doubling < TOLERANCES.max_horizon_doublings:
            logger.debug("energy tail %.3e not settled at t=%g; doubling horizon", tail, horizon)
            horizon *= 2.0
    raise TruncationError(
        f"output energy has not settled by t={horizon:g} "
        f"(converged={traj.converged}, tail {tail:.3e} of {traj.l2_y_dev:.3e})"
    )


# ─── Stability boundary ────────────────────────────────────────────────────

def natural_spectral_abscissa(p: TwoStateParams, h: float) -> float:
    """Largest real part of the linearized natural-feedback loop at inhibition strength h."""
    model = dataclasses.replace(p, h=h)
    return float(np.max(np.linalg.eigvals(linear_closed_loop(model, NaturalController())).real))


def stability_boundary_probe(p: TwoStateParams, h_range: Sequence[float]) -> float:
    """Inhibition strength h at which the natural-feedback loop loses stability."""
    if not isinstance(p, TwoStateParams):
        raise UnsupportedOperationError("the stability boundary is defined for the two-state model")
    lo, hi = (float(v) for v in h_range)
    if not hi > lo:
        raise ContractViolation(f"h_range must be increasing, got [{lo}, {hi}]")
    f_lo = natural_spectral_abscissa(p, lo)
    f_hi = natural_spectral_abscissa(p, hi)
    if not (f_lo < 0 < f_hi):
        raise BracketError(
            f"no stable-to-unstable crossing in h in [{lo:g}, {hi:g}] "
            f"(abscissa {f_lo:.3e} -> {f_hi:.3e})"
        )
    return float(optimize.bisect(lambda h: natural_spectral_abscissa(p, h), lo, hi,
                                 xtol=TOLERANCES.boundary_width))


# ─── Output ────────────────────────────────────────────────────────────────

def trajectory_header(traj: Trajectory) -> list:
    m = traj.states.shape[1] - 1
    return ["t"] + [f"x{i}" for i in range(1, m + 1)] + ["y", "u", "delta"]


def write_trajectory_csv(traj: Trajectory, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(trajectory_header(traj))
        for i in range(len(traj.t)):
            row = [traj.t[i], *traj.states[i], traj.u[i], traj.delta[i]]
            writer.writerow([format(float(v), ".17g") for v in row])
