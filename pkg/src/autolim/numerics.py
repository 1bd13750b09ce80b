"""
Small dense numerical kernels.

Everything here works on state dimensions of a few dozen at most, so the
Lyapunov solver goes through the Kronecker-product linear system and the H∞
norm is a dense frequency sweep refined by golden-section search.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from autolim.errors import (
    ContractViolation,
    ConvergenceError,
    NumericError,
    SpectrumDegeneracyError,
    SynthesisError,
)
from autolim.tolerances import TOLERANCES

logger = logging.getLogger(__name__)

_HINF_CHUNK = 500


def _square(name: str, M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ContractViolation(f"{name} has non-finite entries")
    return M


def _column(name: str, b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=float).reshape(-1, 1)
    if b.shape[0] != n:
        raise ContractViolation(f"{name} has {b.shape[0]} rows, expected {n}")
    return b


# ─── Roots ─────────────────────────────────────────────────────────────────

def shifted_power_roots(a: float, r: float, n: int) -> np.ndarray:
    """Roots of (lambda + a)^n = r^n, i.e. r*exp(2*pi*i*j/n) - a for j = 0..n-1."""
    if n < 1:
        raise ContractViolation(f"n must be >= 1, got {n}")
    j = np.arange(n)
    roots = r * np.exp(2j * np.pi * j / n) - a
    roots[0] = complex(r - a, 0.0)
    return roots


# ─── Lyapunov ──────────────────────────────────────────────────────────────

def lyapunov_solve(A, Q) -> np.ndarray:
    """Solve A'P + PA + Q = 0 through the Kronecker-product linear system."""
    A = _square("A", A)
    Q = _square("Q", Q)
    n = A.shape[0]
    if Q.shape != (n, n):
        raise ContractViolation(f"Q has shape {Q.shape}, expected {(n, n)}")
    eye = np.eye(n)
    op = np.kron(A.T, eye) + np.kron(eye, A.T)
    try:
        p = np.linalg.solve(op, -Q.reshape(-1))
    except np.linalg.LinAlgError as e:
        raise SpectrumDegeneracyError(
            f"Lyapunov operator is singular (two eigenvalues of A sum to zero): {e}"
        ) from e
    if not np.all(np.isfinite(p)):
        raise SpectrumDegeneracyError("Lyapunov solve produced non-finite entries")
    P = p.reshape(n, n)
    P = 0.5 * (P + P.T)
    residual = np.linalg.norm(A.T @ P + P @ A + Q)
    scale = np.linalg.norm(Q) + 2.0 * np.linalg.norm(A) * np.linalg.norm(P)
    if scale > 0 and residual > 1e-6 * scale:
        raise SpectrumDegeneracyError(
            f"Lyapunov operator is numerically singular (residual {residual:.3e})"
        )
    return P


def is_hurwitz(A) -> bool:
    """Lyapunov certificate: A'X + XA + I = 0 has a positive-definite solution."""
    A = _square("A", A)
    try:
        X = lyapunov_solve(A, np.eye(A.shape[0]))
        np.linalg.cholesky(X)
    except (SpectrumDegeneracyError, np.linalg.LinAlgError):
        return False
    return True


def reflection_gain(B, eigenvalues, left_vectors, shift: float = 0.0) -> np.ndarray:
    """Minimum-energy gain that mirrors the given modes across Re = -shift.

    ``left_vectors`` holds one left eigenvector per row, w A = lambda w, and
    must cover every eigenvalue with real part above -shift. The gain is
    B'P with P = W* X^-1 W, where X solves the Lyapunov equation of the
    projected modes (lambda_i + conj(lambda_j) + 2*shift) X_ij = b_i conj(b_j).
    """
    lams = np.asarray(eigenvalues, dtype=complex).reshape(-1)
    W = np.atleast_2d(np.asarray(left_vectors, dtype=complex))
    if W.shape[0] != lams.size:
        raise ContractViolation(f"{W.shape[0]} left eigenvectors for {lams.size} eigenvalues")
    B = _column("B", B, W.shape[1])[:, 0]
    if lams.size == 0:
        return np.zeros((1, W.shape[1]))
    b = W @ B
    weak = np.flatnonzero(np.abs(b) <= TOLERANCES.degenerate_control * np.linalg.norm(W, axis=1))
    if weak.size:
        lam = lams[weak[0]]
        raise SynthesisError(f"the mode at {lam:.6g} cannot be reached from the input")
    X = np.outer(b, b.conj()) / (lams[:, None] + lams.conj()[None, :] + 2.0 * shift)
    try:
        P = W.conj().T @ np.linalg.solve(X, W)
    except np.linalg.LinAlgError as e:
        raise SynthesisError(f"projected mode Gramian is singular: {e}") from e
    P = 0.5 * (P + P.conj().T).real
    return (B @ P).reshape(1, -1)


def _bass_gain(A: np.ndarray, B: np.ndarray) -> Optional[np.ndarray]:
    n = A.shape[0]
    # beta clears the spectral abscissa of -A, so -(A + beta I) is Hurwitz
    floor = max(0.0, float(np.max(-np.linalg.eigvals(A).real)))
    for margin in (1.0, 0.1, 10.0):
        beta = floor + margin * TOLERANCES.bass_margin
        shifted = -(A + beta * np.eye(n)).T
        try:
            Z = lyapunov_solve(shifted, 2.0 * B @ B.T)
            K = np.linalg.solve(Z, B).T
        except (SpectrumDegeneracyError, np.linalg.LinAlgError):
            continue
        if np.all(np.isfinite(K)) and is_hurwitz(A - B @ K):
            return K
        logger.debug("shifted gain with beta=%g does not stabilize", beta)
    return None


def stabilizing_gain(A, B) -> np.ndarray:
    """A gain K with A - BK Hurwitz.

    Bass's shifted-Lyapunov gain comes first: (A + bI)Z + Z(A + bI)' = 2BB'
    with -(A + bI) Hurwitz puts every eigenvalue of A - BB'Z^-1 at real
    part -b. When Z is too ill-conditioned for that gain to stabilize, the
    slow and unstable modes are mirrored with ``reflection_gain``.
    """
    A = _square("A", A)
    n = A.shape[0]
    B = _column("B", B, n)
    K = _bass_gain(A, B)
    if K is not None:
        return K
    lams, V = np.linalg.eig(A.T)
    shift = 1e-2 * max(1.0, float(np.max(np.abs(lams))))
    keep = lams.real > -shift
    try:
        K = reflection_gain(B, lams[keep], V[:, keep].T, shift)
    except SynthesisError as e:
        raise SynthesisError(f"no stabilizing initializer found: {e}") from e
    if not (np.all(np.isfinite(K)) and is_hurwitz(A - B @ K)):
        raise SynthesisError("no stabilizing initializer found: (A, B) is not stabilizable")
    return K


# ─── Riccati ───────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RiccatiSolution:
    P: np.ndarray
    gain: np.ndarray
    iterations: int
    residual: float
    relative_residual: float


def riccati_residual(A, B, Q, R: float, P) -> "tuple[float, float]":
    """Frobenius norm of A'P + PA - PBR^-1B'P + Q and the size of its terms."""
    PB = P @ B
    quad = PB @ PB.T / R
    AtP = A.T @ P
    res = np.linalg.norm(AtP + AtP.T - quad + Q)
    scale = 1.0 + np.linalg.norm(P) + np.linalg.norm(AtP) + np.linalg.norm(quad) + np.linalg.norm(Q)
    return float(res), float(scale)


def riccati_solve(A, B, Q, R: float, initial_gain: Optional[np.ndarray] = None) -> RiccatiSolution:
    """Stabilizing solution of A'P + PA - PBR^-1B'P + Q = 0 by Newton–Kleinman.

    ``initial_gain`` must stabilize A - B*K; when it is missing or does not,
    ``stabilizing_gain`` supplies one.
    """
    A = _square("A", A)
    n = A.shape[0]
    B = _column("B", B, n)
    Q = _square("Q", Q)
    if Q.shape != (n, n):
        raise ContractViolation(f"Q has shape {Q.shape}, expected {(n, n)}")
    if not R > 0:
        raise ContractViolation(f"R must be positive, got {R}")
    Q = 0.5 * (Q + Q.T)

    K = None
    if initial_gain is not None:
        K = np.asarray(initial_gain, dtype=float).reshape(1, n)
        if not is_hurwitz(A - B @ K):
            logger.debug("supplied initial gain does not stabilize; using shifted gain")
            K = None
    if K is None:
        K = stabilizing_gain(A, B)

    P = np.zeros((n, n))
    res, scale = math.inf, 1.0
    iterations = 0
    for iterations in range(1, TOLERANCES.riccati_max_iter + 1):
        closed = A - B @ K
        P_next = lyapunov_solve(closed, Q + R * (K.T @ K))
        K = (B.T @ P_next) / R
        change = np.linalg.norm(P_next - P)
        P = P_next
        res, scale = riccati_residual(A, B, Q, R, P)
        logger.debug("newton-kleinman iteration %d: residual %.3e (scale %.3e)", iterations, res, scale)
        if res <= TOLERANCES.riccati_stop * scale:
            break
        if change <= 1e-15 * (1.0 + np.linalg.norm(P)):
            break

    if res > TOLERANCES.riccati_accept * scale:
        raise ConvergenceError(
            f"Newton–Kleinman stalled after {iterations} iterations (residual {res:.3e})"
        )
    if not is_hurwitz(A - B @ K):
        raise SynthesisError("Riccati solution is not stabilizing")
    return RiccatiSolution(
        P=P, gain=K, iterations=iterations, residual=res, relative_residual=res / scale
    )


def cheap_cost(plant, epsilon: float, xbar0) -> float:
    """1/2 x0' P(eps) x0 for the cheap-control problem with output weight Cy'Cy and R = eps^2."""
    if not epsilon > 0:
        raise ContractViolation(f"epsilon must be positive, got {epsilon}")
    xbar0 = np.asarray(xbar0, dtype=float)
    if not np.any(xbar0):
        return 0.0
    cy = np.asarray(plant.Cy, dtype=float).reshape(-1)
    solution = riccati_solve(plant.A, plant.Bu, np.outer(cy, cy), epsilon ** 2)
    return float(0.5 * xbar0 @ solution.P @ xbar0)


# ─── H-infinity norm ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class HinfResult:
    norm: float
    omega_peak: float


def _gains(A: np.ndarray, b: np.ndarray, c: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    eye = np.eye(n)
    out = np.empty(len(omegas))
    for start in range(0, len(omegas), _HINF_CHUNK):
        chunk = omegas[start:start + _HINF_CHUNK]
        M = 1j * chunk[:, None, None] * eye - A
        rhs = np.broadcast_to(b.astype(complex), (len(chunk), n)).reshape(len(chunk), n, 1)
        try:
            X = np.linalg.solve(M, rhs)[..., 0]
        except np.linalg.LinAlgError:
            for omega in chunk:
                try:
                    np.linalg.solve(1j * omega * eye - A, b.astype(complex))
                except np.linalg.LinAlgError:
                    raise NumericError(f"(jwI - A) is singular at omega={omega:g}")
            raise
        out[start:start + len(chunk)] = np.abs(X @ c)
    return out


def hinf_norm(A, b, c) -> HinfResult:
    """sup over omega of |c (jwI - A)^-1 b| for a stable SISO realization."""
    A = _square("A", A)
    n = A.shape[0]
    b = _column("b", b, n)[:, 0]
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape[0] != n:
        raise ContractViolation(f"c has {c.shape[0]} columns, expected {n}")
    if not is_hurwitz(A):
        raise ContractViolation("hinf_norm requires a stable A")

    dc = float(abs(c @ np.linalg.solve(-A, b)))
    lo, hi = TOLERANCES.hinf_omega_min, TOLERANCES.hinf_omega_max
    ratio = TOLERANCES.hinf_endpoint_ratio
    for extension in range(TOLERANCES.hinf_max_extensions + 1):
        omegas = np.logspace(math.log10(lo), math.log10(hi), TOLERANCES.hinf_points)
        gains = _gains(A, b, c, omegas)
        peak = max(dc, float(gains.max()))
        extend_hi = gains[-1] >= ratio * peak
        # only a low-frequency resonance above the exact DC gain moves the low end
        extend_lo = gains[0] >= ratio * peak and gains[0] > dc * (1.0 + TOLERANCES.hinf_dc_rel)
        if not (extend_hi or extend_lo):
            break
        if extension == TOLERANCES.hinf_max_extensions:
            raise NumericError(
                f"frequency response has not rolled off within [{lo:g}, {hi:g}] rad/s"
            )
        if extend_hi:
            hi *= 10.0
        if extend_lo:
            lo /= 10.0
        logger.debug("extending H-infinity sweep to [%g, %g]", lo, hi)

    i = int(np.argmax(gains))
    if dc >= gains[i]:
        return HinfResult(norm=dc, omega_peak=0.0)

    best_norm, best_omega = float(gains[i]), float(omegas[i])
    if 0 < i < len(omegas) - 1:
        def neg_gain(omega: float) -> float:
            return -float(_gains(A, b, c, np.array([omega]))[0])

        try:
            result = optimize.minimize_scalar(
                neg_gain,
                bracket=(omegas[i - 1], omegas[i], omegas[i + 1]),
                method="golden",
                options={"xtol": TOLERANCES.hinf_rel_tol},
            )
        except ValueError:
            result = None
        if result is not None and -result.fun > best_norm:
            best_norm, best_omega = float(-result.fun), float(result.x)
    return HinfResult(norm=best_norm, omega_peak=best_omega)
