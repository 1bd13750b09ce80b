"""
Linearization about the unperturbed equilibrium and the zero dynamics.

The zero dynamics live in the coordinates z1 = x1 + y/alpha, z_i = x_i
(i >= 2), in which the control input drops out. Their matrices are
shifted-cyclic, so the spectrum and the dominant left eigenvector are
written down in closed form instead of going through an eigensolver.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from autolim.errors import (
    AssumptionViolationError,
    ContractViolation,
    NoUnstableModeError,
    NumericError,
)
from autolim.model import (
    ChainParams,
    CyclicNetwork,
    PathwayModel,
    TwoStateParams,
    equilibrium,
    rhs,
)
from autolim.numerics import shifted_power_roots
from autolim.tolerances import TOLERANCES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearPlant:
    A: np.ndarray
    Bu: np.ndarray
    Bd: np.ndarray
    Cy: np.ndarray

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ContractViolation(f"A must be square, got shape {self.A.shape}")
        for name in ("Bu", "Bd", "Cy"):
            if getattr(self, name).shape != (n,):
                raise ContractViolation(f"{name} must have shape ({n},)")

    @property
    def dim(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class DominantMode:
    lam: float
    v: np.ndarray
    spectrum: np.ndarray


@dataclass(frozen=True)
class ZeroDynamics:
    """Linearized internal dynamics z' = A z + B ybar + C delta."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    lambda_dom: float
    v_dom: np.ndarray
    unstable_count: int
    spectrum: np.ndarray

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> Dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "lambda_dom": float(self.lambda_dom),
            "v_dom": self.v_dom.tolist(),
            "unstable_count": int(self.unstable_count),
        }


@dataclass(frozen=True)
class ZeroCoordinates:
    """A linear plant rewritten in (z, y); ``control_leak`` is max |u-coefficient| on the z-rows."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    control_leak: float


# ─── Jacobians ─────────────────────────────────────────────────────────────

def jacobian_fd(field: Callable[[np.ndarray], np.ndarray], point, step: float = TOLERANCES.jacobian_step) -> np.ndarray:
    """Central-difference Jacobian of ``field`` at ``point``."""
    if not step > 0:
        raise ContractViolation(f"step must be positive, got {step}")
    point = np.asarray(point, dtype=float)
    cols = []
    for j in range(point.size):
        e = np.zeros_like(point)
        e[j] = step
        plus = np.asarray(field(point + e), dtype=float)
        minus = np.asarray(field(point - e), dtype=float)
        if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise NumericError(f"field is not finite near the point along coordinate {j}")
        cols.append((plus - minus) / (2.0 * step))
    return np.column_stack(cols)


def _pathway_plant(model) -> LinearPlant:
    n, K, alpha, g, a = model.n, model.rate, model.alpha, model.g, model.a
    dim = n + 1
    A = np.zeros((dim, dim))
    # dR_PK/dx_n = K and dR_PK/dy = -g at x_n = 1/K, y = 1
    A[0, 0] = -K
    A[0, n] += a
    for i in range(1, n):
        A[i, i - 1] = K
        A[i, i] = -K
    A[n - 1, n] += g
    A[n, n - 1] = (alpha + 1.0) * K
    A[n, n] = -(alpha + 1.0) * g - alpha * a
    Bu = np.zeros(dim)
    Bu[0] = 1.0
    Bu[n] = -alpha
    Bd = np.zeros(dim)
    Bd[n] = -1.0
    Cy = np.zeros(dim)
    Cy[n] = 1.0
    return LinearPlant(A=A, Bu=Bu, Bd=Bd, Cy=Cy)


def _cyclic_plant(net: CyclicNetwork) -> LinearPlant:
    n = net.n
    f_prime, g_prime, sink_prime = net.slopes()
    A = np.zeros((n + 1, n + 1))
    for i in range(n):
        A[i, i] = -f_prime[i]
        A[i + 1, i] = g_prime[i]
    A[n, n] = -sink_prime
    Bu = np.zeros(n + 1)
    Bu[0] = 1.0
    Bu[n] = -net.alpha
    Bd = np.zeros(n + 1)
    Bd[n] = -1.0
    Cy = np.zeros(n + 1)
    Cy[n] = 1.0
    return LinearPlant(A=A, Bu=Bu, Bd=Bd, Cy=Cy)


def linearize_full(model: PathwayModel, validate: bool = True) -> LinearPlant:
    """Analytic linearization at (x*, u*, delta = 0), cross-checked by finite differences."""
    eq = equilibrium(model)
    if isinstance(model, CyclicNetwork):
        plant = _cyclic_plant(model)
    else:
        plant = _pathway_plant(model)
    if validate:
        _check_against_fd(model, plant, eq.state, eq.u_star)
    return plant


def _check_against_fd(model: PathwayModel, plant: LinearPlant, state: np.ndarray, u_star: float) -> None:
    step = TOLERANCES.jacobian_step
    if np.any(state <= step):
        logger.debug("equilibrium touches the boundary; skipping finite-difference check")
        return
    A_fd = jacobian_fd(lambda s: rhs(model, s, u_star, 0.0), state, step)
    Bu_fd = (rhs(model, state, u_star + step, 0.0) - rhs(model, state, u_star - step, 0.0)) / (2 * step)
    Bd_fd = (rhs(model, state, u_star, step) - rhs(model, state, u_star, -step)) / (2 * step)
    for name, analytic, fd in (("A", plant.A, A_fd), ("Bu", plant.Bu, Bu_fd), ("Bd", plant.Bd, Bd_fd)):
        scale = max(1.0, float(np.max(np.abs(analytic))))
        err = float(np.max(np.abs(analytic - fd)))
        if err > TOLERANCES.jacobian_match * scale:
            raise NumericError(
                f"analytic {name} disagrees with finite differences by {err:.3e} for {model.family}"
            )


def closed_loop(plant: LinearPlant, gain) -> np.ndarray:
    """A - Bu*gain for a state-feedback row u = -gain x."""
    gain = np.asarray(gain, dtype=float).reshape(-1)
    if gain.shape != (plant.dim,):
        raise ContractViolation(f"gain has {gain.size} entries, expected {plant.dim}")
    return plant.A - np.outer(plant.Bu, gain)


def to_zero_coordinates(plant: LinearPlant, alpha: float) -> ZeroCoordinates:
    """Apply z1 = x1 + y/alpha to a full linear plant and read off the zero dynamics."""
    dim = plant.dim
    m = dim - 1
    T = np.eye(dim)
    T[0, m] = 1.0 / alpha
    T_inv = np.eye(dim)
    T_inv[0, m] = -1.0 / alpha
    A_t = T @ plant.A @ T_inv
    return ZeroCoordinates(
        A=A_t[:m, :m],
        B=A_t[:m, m].copy(),
        C=(T @ plant.Bd)[:m],
        control_leak=float(np.max(np.abs((T @ plant.Bu)[:m]))),
    )


# ─── Zero dynamics ─────────────────────────────────────────────────────────

def _shifted_cyclic(diag: float, sub: np.ndarray, corner: float) -> np.ndarray:
    n = len(sub) + 1
    A = np.diag(np.full(n, diag, dtype=float))
    A[np.arange(1, n), np.arange(n - 1)] = sub
    A[0, n - 1] += corner
    return A


def _unstable_count(spectrum: np.ndarray, scale: float) -> int:
    return int(np.sum(spectrum.real > 1e-12 * max(1.0, scale)))


def cyclic_slopes(net: CyclicNetwork):
    """(a, r, g_i', f_{n+1}') at equilibrium; checks the common f_i' and r > a."""
    f_prime, g_prime, sink_prime = net.slopes()
    a = float(f_prime[0])
    spread = float(np.max(np.abs(f_prime - a)))
    if spread > TOLERANCES.assumption_rel * max(1.0, abs(a)):
        raise AssumptionViolationError(
            f"f_i'(x_i*) must share one value; got {', '.join(f'{v:.6g}' for v in f_prime)}"
        )
    r = float((np.prod(g_prime) / net.alpha) ** (1.0 / net.n))
    if r <= a:
        raise NoUnstableModeError(
            f"r = {r:.6g} <= a = {a:.6g}: the zero dynamics have no unstable mode"
        )
    return a, r, g_prime, float(sink_prime)


def dominant_mode(model: PathwayModel) -> DominantMode:
    """Closed-form spectrum and dominant left eigenpair of the zero dynamics.

    v is normalized so that v[0] == 1.
    """
    if isinstance(model, CyclicNetwork):
        a, r, g_prime, _ = cyclic_slopes(model)
        n = model.n
        v = np.ones(n)
        for i in range(1, n):
            v[i] = v[i - 1] * r / g_prime[i - 1]
        return DominantMode(lam=r - a, v=v, spectrum=shifted_power_roots(a, r, n))
    if isinstance(model, TwoStateParams):
        lam = model.k / model.alpha
        return DominantMode(lam=lam, v=np.ones(1), spectrum=np.array([complex(lam, 0.0)]))
    K, n = model.K, model.n
    rho = ((model.alpha + 1.0) / model.alpha) ** (1.0 / n)
    return DominantMode(
        lam=K * (rho - 1.0),
        v=rho ** np.arange(n),
        spectrum=shifted_power_roots(K, K * rho, n),
    )


def zero_dynamics(model: PathwayModel) -> ZeroDynamics:
    """(A, B, C) of the zero dynamics plus the dominant eigenpair."""
    alpha = model.alpha
    mode = dominant_mode(model)
    C = np.zeros(model.n)
    C[0] = -1.0 / alpha

    if isinstance(model, CyclicNetwork):
        a, r, g_prime, sink_prime = cyclic_slopes(model)
        n = model.n
        if n == 1:
            A = np.array([[r - a]])
            B = np.array([(a - sink_prime - r) / alpha])
        else:
            A = _shifted_cyclic(-a, g_prime[:-1], g_prime[-1] / alpha)
            B = np.zeros(n)
            B[0] = (a - sink_prime) / alpha
            B[1] = -g_prime[0] / alpha
        scale = r + a
    else:
        K, g, n = model.rate, model.g, model.n
        if n == 1:
            A = np.array([[K / alpha]])
            B = np.array([-(K + g * alpha) / alpha ** 2])
        else:
            A = _shifted_cyclic(-K, np.full(n - 1, K), (1.0 + 1.0 / alpha) * K)
            B = np.zeros(n)
            B[0] += K / alpha - (alpha + 1.0) * g / alpha
            B[1] += -K / alpha
            B[n - 1] += g
        scale = K * (1.0 + (1.0 + 1.0 / alpha))

    return ZeroDynamics(
        A=A,
        B=B,
        C=C,
        lambda_dom=float(mode.lam),
        v_dom=mode.v,
        unstable_count=_unstable_count(mode.spectrum, scale),
        spectrum=mode.spectrum,
    )


def unstable_modes(zd: ZeroDynamics):
    """Unstable eigenvalues of the zero dynamics and their left eigenvectors (one per row).

    The shifted-cyclic structure gives w_{i+1} = w_i (mu - A_ii) / A_{i+1,i},
    so each row starts at w_1 = 1 like ``v_dom``.
    """
    A = zd.A
    scale = max(1.0, float(np.max(np.abs(np.diag(A)))))
    lams = zd.spectrum[zd.spectrum.real > 1e-12 * scale]
    W = np.ones((lams.size, zd.dim), dtype=complex)
    for i in range(zd.dim - 1):
        W[:, i + 1] = W[:, i] * (lams - A[i, i]) / A[i + 1, i]
    return lams, W
