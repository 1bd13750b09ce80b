"""
Hard limits on disturbance attenuation (Gamma) and output energy (H).

Closed forms exist for all three families; each one is paired with an
oracle computed from the dominant mode of the zero dynamics so the two can
be compared. ``analyze`` runs everything for one model and ``sweep`` tabulates
Gamma over a parameter grid.
"""

import dataclasses
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from autolim.errors import (
    ContractViolation,
    DegenerateControlError,
    DomainError,
    InvalidModelError,
    NoUnstableModeError,
    UnsupportedOperationError,
)
from autolim.linearize import ZeroDynamics, cyclic_slopes, unstable_modes, zero_dynamics
from autolim.model import (
    ChainParams,
    CyclicNetwork,
    PathwayModel,
    TwoStateParams,
    equilibrium,
)
from autolim.numerics import RiccatiSolution, reflection_gain, riccati_solve
from autolim.tolerances import TOLERANCES

logger = logging.getLogger(__name__)

ENERGY_ORDER = "quadratic leading term"
SWEEP_AXES = {
    "two_state": ("alpha", "k", "g"),
    "chain": ("alpha", "K", "g", "n"),
}


def _rho(alpha: float, n: int) -> float:
    return ((alpha + 1.0) / alpha) ** (1.0 / n)


# ─── Gamma ─────────────────────────────────────────────────────────────────

def gamma_closed_form(model: PathwayModel) -> float:
    if isinstance(model, TwoStateParams):
        return model.alpha / (model.k + model.g * model.alpha)
    if isinstance(model, ChainParams):
        rho = _rho(model.alpha, model.n)
        return 1.0 / ((model.K + model.g * model.alpha * rho ** (model.n - 1)) * (rho - 1.0))
    a, r, _, sink_prime = cyclic_slopes(model)
    return 1.0 / (sink_prime + r - a)


def _projected_control(zd: ZeroDynamics) -> float:
    if not zd.lambda_dom > 0:
        raise NoUnstableModeError(f"dominant eigenvalue {zd.lambda_dom:.6g} is not positive")
    vb = float(zd.v_dom @ zd.B)
    if abs(vb) < TOLERANCES.degenerate_control:
        raise DegenerateControlError(
            f"v'B = {vb:.3e}: the output cannot act on the dominant mode"
        )
    return vb


def gamma_dominant_oracle(zd: ZeroDynamics) -> float:
    """|v'C| / |v'B| for the scalar unstable subsystem."""
    vb = _projected_control(zd)
    return float(abs(zd.v_dom @ zd.C) / abs(vb))


# ─── Energy ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EnergyLimit:
    H: float
    z_tilde0: float


def energy_coefficient(model: PathwayModel) -> float:
    """H per unit z_tilde0 squared."""
    if isinstance(model, TwoStateParams):
        return model.alpha ** 3 * model.k / (model.g * model.alpha + model.k) ** 2
    if isinstance(model, ChainParams):
        alpha, K, g, n = model.alpha, model.K, model.g, model.n
        rho = _rho(alpha, n)
        return alpha ** 2 * K / ((rho - 1.0) * (K + g * alpha * rho ** (n - 1)) ** 2)
    raise UnsupportedOperationError("no closed-form energy limit for cyclic networks")


def _deviation(model: PathwayModel, x0, y0: float) -> np.ndarray:
    """Zero-coordinate deviation zbar = (x1 - x1* + (y0 - y*)/alpha, x2 - x2*, ...)."""
    eq = equilibrium(model)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != eq.x_star.shape:
        raise ContractViolation(f"x0 has shape {x0.shape}, expected {eq.x_star.shape}")
    negative = np.flatnonzero(x0 < 0)
    if negative.size:
        raise DomainError(f"x0[{int(negative[0])}] = {x0[negative[0]]!r} is negative")
    if not y0 >= 0:
        raise DomainError(f"y0 = {y0!r} must be nonnegative")
    zbar = x0 - eq.x_star
    zbar[0] += (y0 - eq.y_star) / model.alpha
    return zbar


def energy_closed_form(model: PathwayModel, x0, y0: float) -> EnergyLimit:
    """Output-energy hard limit H for a deviation (x0, y0) from equilibrium."""
    if isinstance(model, CyclicNetwork):
        raise UnsupportedOperationError("no closed-form energy limit for cyclic networks")
    zbar = _deviation(model, x0, y0)
    weights = _rho(model.alpha, model.n) ** np.arange(model.n)
    z_tilde0 = float(weights @ zbar)
    return EnergyLimit(H=energy_coefficient(model) * z_tilde0 ** 2, z_tilde0=z_tilde0)


def energy_oracle(zd: ZeroDynamics, zbar0) -> float:
    """Scalar-Riccati cost lambda (v'z0)^2 / (v'B)^2 of the dominant mode."""
    vb = _projected_control(zd)
    zbar0 = np.asarray(zbar0, dtype=float).reshape(-1)
    if zbar0.shape != (zd.dim,):
        raise ContractViolation(f"zbar0 has {zbar0.size} entries, expected {zd.dim}")
    return float(zd.lambda_dom * (zd.v_dom @ zbar0) ** 2 / vb ** 2)


def min_energy_riccati(zd: ZeroDynamics) -> RiccatiSolution:
    """Stabilizing solution of A'P + PA = PBB'P on the full zero dynamics.

    Newton-Kleinman starts from the gain that mirrors every unstable mode,
    built from the closed-form eigenpairs.
    """
    _projected_control(zd)
    lams, W = unstable_modes(zd)
    initial = reflection_gain(zd.B, lams, W)
    return riccati_solve(zd.A, zd.B, np.zeros((zd.dim, zd.dim)), 1.0, initial_gain=initial)


# ─── Approximations ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Approximations:
    gamma_approx: float
    energy_coeff_approx: float


def approximations(p: Union[ChainParams, TwoStateParams]) -> Approximations:
    """Large-n estimates of Gamma and of H per unit z_tilde0 squared."""
    if isinstance(p, CyclicNetwork):
        raise UnsupportedOperationError("large-n approximations apply to chains only")
    alpha, K, g, n = p.alpha, p.rate, p.g, p.n
    log_ratio = math.log1p(1.0 / alpha)
    drain = K + g * (alpha + 1.0)
    return Approximations(
        gamma_approx=n / (drain * log_ratio),
        energy_coeff_approx=alpha ** 2 * K * n / (drain ** 2 * log_ratio),
    )


# ─── Report ────────────────────────────────────────────────────────────────

@dataclass
class HardLimitReport:
    family: str
    model: Dict
    gamma_closed: float
    gamma_oracle: float
    energy_closed: Optional[float]
    energy_oracle: float
    energy_riccati: float
    gamma_approx: Optional[float]
    lambda_dom: float
    unstable_count: int
    z_tilde0: float
    zero_dynamics: ZeroDynamics
    discrepancies: Dict[str, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "family": self.family,
            "model": self.model,
            "gamma_closed": self.gamma_closed,
            "gamma_oracle": self.gamma_oracle,
            "energy_closed": self.energy_closed,
            "energy_oracle": self.energy_oracle,
            "energy_riccati": self.energy_riccati,
            "energy_order": ENERGY_ORDER,
            "gamma_approx": self.gamma_approx,
            "lambda_dom": self.lambda_dom,
            "unstable_count": self.unstable_count,
            "z_tilde0": self.z_tilde0,
            "discrepancies": dict(self.discrepancies),
            "zero_dynamics": self.zero_dynamics.to_dict(),
        }

    def summary(self) -> str:
        lines = [
            f"Gamma (attenuation limit): {self.gamma_closed:.10g}"
            f"  (oracle {self.gamma_oracle:.10g})",
        ]
        if self.gamma_approx is not None:
            lines.append(f"large-n approximation: {self.gamma_approx:.10g}")
        if self.energy_closed is not None:
            lines.append(
                f"H (output-energy limit): {self.energy_closed:.10g} at z0 = {self.z_tilde0:.6g}"
            )
        lines.append(f"H from dominant mode: {self.energy_oracle:.10g}  ({ENERGY_ORDER})")
        lines.append(f"dominant eigenvalue: {self.lambda_dom:.10g}")
        if self.unstable_count > 1:
            lines.append(
                f"{self.unstable_count} unstable zero-dynamics modes: the bounds use the dominant one only"
            )
        return "\n".join(lines)


def _relative(closed: float, other: float) -> float:
    return abs(closed - other) / max(abs(closed), TOLERANCES.discrepancy_floor)


def analyze(model: PathwayModel, x0=None, y0: Optional[float] = None) -> HardLimitReport:
    """Every hard limit for ``model``, with oracles and discrepancies.

    Without an initial condition the deviation x0 = x* + e1, y0 = y* is used.
    """
    eq = equilibrium(model)
    zd = zero_dynamics(model)
    if x0 is None:
        x0 = eq.x_star.copy()
        x0[0] += 1.0
    if y0 is None:
        y0 = eq.y_star
    zbar = _deviation(model, x0, y0)

    gamma_closed = gamma_closed_form(model)
    gamma_oracle = gamma_dominant_oracle(zd)
    energy_from_mode = energy_oracle(zd, zbar)
    riccati = min_energy_riccati(zd)
    discrepancies: Dict[str, Optional[float]] = {
        "gamma": _relative(gamma_closed, gamma_oracle),
        "energy": None,
    }

    energy_closed = None
    if not isinstance(model, CyclicNetwork):
        energy_closed = energy_closed_form(model, x0, y0).H
        discrepancies["energy"] = _relative(energy_closed, energy_from_mode)

    if zd.unstable_count > 1:
        logger.warning(
            "%d unstable zero-dynamics modes; the dominant-mode bounds may be loose",
            zd.unstable_count,
        )

    return HardLimitReport(
        family=model.family,
        model=model.to_dict(),
        gamma_closed=gamma_closed,
        gamma_oracle=gamma_oracle,
        energy_closed=energy_closed,
        energy_oracle=energy_from_mode,
        energy_riccati=float(0.5 * zbar @ riccati.P @ zbar),
        gamma_approx=approximations(model).gamma_approx if isinstance(model, ChainParams) else None,
        lambda_dom=zd.lambda_dom,
        unstable_count=zd.unstable_count,
        z_tilde0=float(zd.v_dom @ zbar),
        zero_dynamics=zd,
        discrepancies=discrepancies,
    )


# ─── Sweeps ────────────────────────────────────────────────────────────────

SWEEP_COLUMNS = ("gamma_closed", "gamma_approx", "approx_rel_err", "energy_coeff", "energy_coeff_approx")


@dataclass(frozen=True)
class SweepTable:
    axes: Tuple[str, ...]
    rows: List[Tuple[float, ...]]

    @property
    def columns(self) -> Tuple[str, ...]:
        return self.axes + SWEEP_COLUMNS

    def column(self, name: str) -> List[float]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def sweep(base: Union[ChainParams, TwoStateParams], axes: Mapping[str, Sequence[float]]) -> SweepTable:
    """Evaluate Gamma, its approximation and the energy coefficient over a grid.

    Rows follow ``itertools.product`` over the axes in declaration order.
    """
    if isinstance(base, CyclicNetwork):
        raise UnsupportedOperationError("sweeps are defined for two_state and chain models")
    if not axes:
        raise ContractViolation("a sweep needs at least one axis")
    allowed = SWEEP_AXES[base.family]
    for name, values in axes.items():
        if name not in allowed:
            raise ContractViolation(
                f"unknown sweep axis {name!r} for {base.family} (allowed: {', '.join(allowed)})"
            )
        if len(values) == 0:
            raise ContractViolation(f"sweep axis {name!r} is empty")

    names = tuple(axes)
    rows = []
    for index, values in enumerate(itertools.product(*(axes[name] for name in names))):
        point = dict(zip(names, values))
        try:
            params = dataclasses.replace(base, **point)
        except InvalidModelError as e:
            raise InvalidModelError(f"sweep row {index} ({point}): {e}") from e
        logger.debug("sweep row %d: %s", index, point)
        gamma = gamma_closed_form(params)
        approx = approximations(params)
        row = tuple(float(v) for v in values) + (
            gamma,
            approx.gamma_approx,
            abs(approx.gamma_approx - gamma) / gamma,
            energy_coefficient(params),
            approx.energy_coeff_approx,
        )
        if not all(math.isfinite(v) for v in row):
            raise InvalidModelError(f"sweep row {index} ({point}) has non-finite entries")
        rows.append(row)
    return SweepTable(axes=names, rows=rows)
