"""
Numerical tolerances used across autolim.

All thresholds live here so that every module agrees on them. The verify
suites multiply their discrepancy tolerances by AUTOLIM_TOL_SCALE.
"""

import os
from dataclasses import dataclass

from autolim.errors import ConfigError

TOL_SCALE_ENV = "AUTOLIM_TOL_SCALE"


@dataclass(frozen=True)
class Tolerances:
    # model
    equilibrium_residual: float = 1e-10
    cyclic_equilibrium_residual: float = 1e-8
    assumption_rel: float = 1e-9
    derivative_fd_step: float = 1e-6
    derivative_fd_rel: float = 1e-5

    # linearize
    jacobian_step: float = 1e-6
    jacobian_match: float = 1e-6
    eigen_residual: float = 1e-9

    # limits
    discrepancy_floor: float = 1e-300
    degenerate_control: float = 1e-14

    # numerics
    lyapunov_residual: float = 1e-10
    riccati_stop: float = 1e-11
    riccati_accept: float = 1e-10
    riccati_max_iter: int = 100
    bass_margin: float = 1.0
    hinf_points: int = 4000
    hinf_omega_min: float = 1e-4
    hinf_omega_max: float = 1e4
    hinf_rel_tol: float = 1e-8
    hinf_endpoint_ratio: float = 0.9
    hinf_dc_rel: float = 1e-6
    hinf_max_extensions: int = 3

    # sim
    positivity_snap: float = 1e-9
    converged: float = 1e-6
    tail_fraction: float = 0.1
    tail_energy_ratio: float = 1e-3
    max_horizon_doublings: int = 3

    # stability boundary bisection
    boundary_width: float = 1e-4


TOLERANCES = Tolerances()


def tolerance_scale() -> float:
    """Return the AUTOLIM_TOL_SCALE multiplier (default 1)."""
    raw = os.environ.get(TOL_SCALE_ENV)
    if raw is None or raw == "":
        return 1.0
    try:
        scale = float(raw)
    except ValueError:
        raise ConfigError(f"{TOL_SCALE_ENV} must be a number, got {raw!r}")
    if not scale > 0:
        raise ConfigError(f"{TOL_SCALE_ENV} must be positive, got {raw!r}")
    return scale
