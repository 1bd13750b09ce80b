"""
Pathway model families, rate laws and vector fields.

Three families are supported:

    TwoStateParams   lumped intermediate x, product y (state (x1, y))
    ChainParams      n intermediates x1..xn feeding the product y
    CyclicNetwork    general cyclic feedback network built from a rate catalog

All concentrations are normalized so that the unperturbed equilibrium of the
two built-in families is x_i* = 1/K, y* = 1 with u* = 1. The control input u
multiplies the PFK flux y^a, which is why the "natural" inhibition law
2/(1+y^(2h)) can be swapped for any feedback.
"""

import math
from dataclasses import dataclass
from typing import ClassVar, Dict, Tuple, Union

import numpy as np

from autolim.errors import (
    ContractViolation,
    DomainError,
    InvalidModelError,
    UnsupportedOperationError,
)
from autolim.tolerances import TOLERANCES

RATE_KINDS = ("linear", "saturating", "power")


# ─── Rate catalog ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RateFunction:
    """A scalar rate law from the JSON-expressible catalog.

    linear      c*x
    saturating  c*x/(1+x)
    power       c*x**p
    """

    kind: str
    c: float
    p: float = 1.0

    def __post_init__(self):
        _as_floats(self, "c", "p")
        if self.kind not in RATE_KINDS:
            raise InvalidModelError(
                f"unknown rate kind {self.kind!r} (expected one of {', '.join(RATE_KINDS)})"
            )
        if not math.isfinite(self.c) or self.c < 0:
            raise InvalidModelError(f"rate coefficient c must be finite and >= 0, got {self.c}")
        if self.kind == "power" and (not math.isfinite(self.p) or self.p < 0):
            raise InvalidModelError(f"power exponent p must be finite and >= 0, got {self.p}")

    def __call__(self, x: float) -> float:
        if self.kind == "linear":
            return self.c * x
        if self.kind == "saturating":
            return self.c * x / (1.0 + x)
        return self.c * x ** self.p

    def derivative(self, x: float) -> float:
        if self.kind == "linear":
            return self.c
        if self.kind == "saturating":
            return self.c / (1.0 + x) ** 2
        if self.p == 0:
            return 0.0
        return self.c * self.p * x ** (self.p - 1.0)

    def to_dict(self) -> Dict:
        out: Dict = {"kind": self.kind, "c": self.c}
        if self.kind == "power":
            out["p"] = self.p
        return out


def linear(c: float) -> RateFunction:
    return RateFunction("linear", c)


def constant(c: float) -> RateFunction:
    """c*x**0, the constant basal consumption of the built-in families."""
    return RateFunction("power", c, 0.0)


# ─── Families ──────────────────────────────────────────────────────────────

def _as_floats(obj, *names: str) -> None:
    """Store the named fields of a frozen dataclass as floats."""
    for name in names:
        value = getattr(obj, name)
        try:
            object.__setattr__(obj, name, float(value))
        except (TypeError, ValueError):
            raise InvalidModelError(f"{name} must be a number, got {value!r}") from None


def _check_params(alpha: float, rate: float, rate_name: str, g: float, h: float, a: float) -> None:
    values = {"alpha": alpha, rate_name: rate, "g": g, "h": h, "a": a}
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidModelError(f"{name} must be finite, got {value}")
    if alpha <= 0:
        raise InvalidModelError(f"alpha must be positive, got {alpha}")
    if rate <= 0:
        raise InvalidModelError(f"{rate_name} must be positive, got {rate}")
    for name in ("g", "h", "a"):
        if values[name] < 0:
            raise InvalidModelError(f"{name} must be nonnegative, got {values[name]}")


@dataclass(frozen=True)
class TwoStateParams:
    """Minimal pathway: PFK, one lumped intermediate, PK, consumption."""

    family: ClassVar[str] = "two_state"

    alpha: float
    k: float
    g: float = 0.0
    h: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        _as_floats(self, "alpha", "k", "g", "h", "a")
        _check_params(self.alpha, self.k, "k", self.g, self.h, self.a)

    @property
    def state_dim(self) -> int:
        return 2

    @property
    def n(self) -> int:
        return 1

    @property
    def rate(self) -> float:
        return self.k

    def as_cyclic(self) -> "CyclicNetwork":
        """Cyclic-form view of the pathway with PFK flux y^a*u as input (g = 0 only)."""
        if self.g != 0:
            raise UnsupportedOperationError(
                "the cyclic-form view needs g = 0 (ATP feedback on PK is not cyclic-form)"
            )
        return example_constant_consumption(self.alpha, self.k)

    def to_dict(self) -> Dict:
        return {"family": self.family, "alpha": self.alpha, "k": self.k,
                "g": self.g, "h": self.h, "a": self.a}


@dataclass(frozen=True)
class ChainParams:
    """Pathway with n intermediate metabolites sharing the rate K."""

    family: ClassVar[str] = "chain"

    alpha: float
    K: float
    n: int
    g: float = 0.0
    h: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        _as_floats(self, "alpha", "K", "g", "h", "a")
        _check_params(self.alpha, self.K, "K", self.g, self.h, self.a)
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidModelError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def state_dim(self) -> int:
        return self.n + 1

    @property
    def rate(self) -> float:
        return self.K

    def as_cyclic(self) -> "CyclicNetwork":
        """Cyclic-form view of the chain (g = 0 only)."""
        if self.g != 0:
            raise UnsupportedOperationError(
                "the cyclic-form view needs g = 0 (ATP feedback on PK is not cyclic-form)"
            )
        K = self.K
        nodes = tuple(
            (linear(K), linear((self.alpha + 1.0) * K if i == self.n - 1 else K))
            for i in range(self.n)
        )
        return CyclicNetwork(
            alpha=self.alpha,
            nodes=nodes,
            sink=constant(1.0),
            equilibrium=tuple([1.0 / K] * self.n + [1.0]),
        )

    def to_dict(self) -> Dict:
        return {"family": self.family, "alpha": self.alpha, "K": self.K, "n": self.n,
                "g": self.g, "h": self.h, "a": self.a}


@dataclass(frozen=True)
class CyclicNetwork:
    """Cyclic feedback network.

    x1' = -f_1(x_1) + u
    xi' = -f_i(x_i) + g_{i-1}(x_{i-1})                 i = 2..n
    y'  = -f_{n+1}(y) + g_n(x_n) - alpha*u - delta

    ``nodes`` holds the (f_i, g_i) pairs, ``sink`` is f_{n+1} and
    ``equilibrium`` is (x_1*, ..., x_n*, y*).
    """

    family: ClassVar[str] = "cyclic"

    alpha: float
    nodes: Tuple[Tuple[RateFunction, RateFunction], ...]
    sink: RateFunction
    equilibrium: Tuple[float, ...]

    def __post_init__(self):
        _as_floats(self, "alpha")
        if not math.isfinite(self.alpha) or self.alpha <= 0:
            raise InvalidModelError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "nodes", tuple(tuple(pair) for pair in self.nodes))
        object.__setattr__(self, "equilibrium", tuple(float(v) for v in self.equilibrium))
        if len(self.nodes) < 1:
            raise InvalidModelError("a cyclic network needs at least one upstream node")
        if any(len(pair) != 2 for pair in self.nodes):
            raise InvalidModelError("each node needs exactly one (f, g) pair")
        if len(self.equilibrium) != self.n + 1:
            raise InvalidModelError(
                f"equilibrium has {len(self.equilibrium)} entries, expected n+1 = {self.n + 1}"
            )
        for i, value in enumerate(self.equilibrium):
            if not math.isfinite(value) or value < 0:
                raise InvalidModelError(f"equilibrium[{i}] must be finite and >= 0, got {value}")
        self._check_rates()

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def state_dim(self) -> int:
        return self.n + 1

    def _check_rates(self) -> None:
        upper = max(10.0, 2.0 * max(self.equilibrium))
        grid = np.linspace(0.0, upper, 65)
        for i, (f, g) in enumerate(self.nodes, start=1):
            for name, rate in (("f", f), ("g", g)):
                values = np.array([rate(x) for x in grid])
                if not np.all(np.diff(values) > 0):
                    raise InvalidModelError(
                        f"{name}_{i} ({rate.kind}) must be increasing on the nonnegative axis"
                    )
        step = TOLERANCES.derivative_fd_step
        rates = [(f"f_{i}", f, self.equilibrium[i - 1]) for i, (f, _) in enumerate(self.nodes, 1)]
        rates += [(f"g_{i}", g, self.equilibrium[i - 1]) for i, (_, g) in enumerate(self.nodes, 1)]
        rates.append((f"f_{self.n + 1}", self.sink, self.equilibrium[-1]))
        for name, rate, x_star in rates:
            for x in (x_star, 0.5, 1.0, 2.0):
                if x < 10 * step:
                    continue
                fd = (rate(x + step) - rate(x - step)) / (2 * step)
                analytic = rate.derivative(x)
                if abs(fd - analytic) > TOLERANCES.derivative_fd_rel * max(1.0, abs(analytic)):
                    raise InvalidModelError(
                        f"derivative of {name} disagrees with finite differences at x={x:g}: "
                        f"{analytic!r} vs {fd!r}"
                    )

    def slopes(self) -> Tuple[np.ndarray, np.ndarray, float]:
        """Return (f_i'(x_i*), g_i'(x_i*), f_{n+1}'(y*)) at the supplied equilibrium."""
        xs = self.equilibrium[:-1]
        f_prime = np.array([f.derivative(x) for (f, _), x in zip(self.nodes, xs)])
        g_prime = np.array([g.derivative(x) for (_, g), x in zip(self.nodes, xs)])
        return f_prime, g_prime, self.sink.derivative(self.equilibrium[-1])

    def to_dict(self) -> Dict:
        return {
            "family": self.family,
            "alpha": self.alpha,
            "nodes": [{"f": f.to_dict(), "g": g.to_dict()} for f, g in self.nodes],
            "sink": self.sink.to_dict(),
            "equilibrium": list(self.equilibrium),
        }


PathwayModel = Union[TwoStateParams, ChainParams, CyclicNetwork]


def example_constant_consumption(alpha: float, k: float) -> CyclicNetwork:
    """Two-state pathway with g = 0 and basal consumption 1 + delta, in cyclic form."""
    return CyclicNetwork(
        alpha=alpha,
        nodes=((linear(k), linear((alpha + 1.0) * k)),),
        sink=constant(1.0),
        equilibrium=(1.0 / k, 1.0),
    )


def example_linear_consumption(alpha: float, k: float, k_y: float) -> CyclicNetwork:
    """Two-state pathway with g = 0 and consumption k_y*y + delta, in cyclic form."""
    return CyclicNetwork(
        alpha=alpha,
        nodes=((linear(k), linear((alpha + 1.0) * k)),),
        sink=linear(k_y),
        equilibrium=(k_y / k, 1.0),
    )


# ─── Vector fields ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Equilibrium:
    x_star: np.ndarray
    y_star: float
    u_star: float

    @property
    def state(self) -> np.ndarray:
        return np.append(self.x_star, self.y_star)


def _pathway_rhs(alpha: float, K: float, g: float, a: float, n: int,
                 state: np.ndarray, u: float, delta: float) -> np.ndarray:
    x = state[:n]
    y = state[n]
    pfk = y ** a * u
    pk = 2.0 * K * x[n - 1] / (1.0 + y ** (2.0 * g))
    out = np.empty(n + 1)
    if n == 1:
        out[0] = pfk - pk
    else:
        out[0] = pfk - K * x[0]
        out[1:n - 1] = K * (x[:n - 2] - x[1:n - 1])
        out[n - 1] = K * x[n - 2] - pk
    out[n] = (alpha + 1.0) * pk - alpha * pfk - (1.0 + delta)
    return out


def _cyclic_rhs(net: CyclicNetwork, state: np.ndarray, u: float, delta: float) -> np.ndarray:
    n = net.n
    out = np.empty(n + 1)
    upstream = u
    for i, (f, g) in enumerate(net.nodes):
        out[i] = -f(state[i]) + upstream
        upstream = g(state[i])
    out[n] = -net.sink(state[n]) + upstream - net.alpha * u - delta
    return out


def rhs(model: PathwayModel, state: np.ndarray, u: float, delta: float) -> np.ndarray:
    """Unchecked time derivative; callers guarantee shape and sign."""
    if isinstance(model, CyclicNetwork):
        return _cyclic_rhs(model, state, u, delta)
    return _pathway_rhs(model.alpha, model.rate, model.g, model.a, model.n, state, u, delta)


def vector_field(model: PathwayModel, state, u: float, delta: float = 0.0) -> np.ndarray:
    """Time derivative of the state under the control-system form of the model."""
    state = np.asarray(state, dtype=float)
    if state.shape != (model.state_dim,):
        raise ContractViolation(
            f"state has shape {state.shape}, expected ({model.state_dim},) for {model.family}"
        )
    negative = np.flatnonzero(state < 0)
    if negative.size:
        i = int(negative[0])
        raise DomainError(f"state[{i}] = {state[i]!r} is negative; concentrations must be >= 0")
    return rhs(model, state, u, delta)


def equilibrium(model: PathwayModel) -> Equilibrium:
    """Normalized unperturbed equilibrium and the control value that holds it."""
    if isinstance(model, CyclicNetwork):
        state = np.array(model.equilibrium)
        _, g_last = model.nodes[-1]
        u_star = (g_last(state[-2]) - model.sink(state[-1])) / model.alpha
        residual = float(np.max(np.abs(_cyclic_rhs(model, state, u_star, 0.0))))
        if residual > TOLERANCES.cyclic_equilibrium_residual:
            raise InvalidModelError(
                f"supplied equilibrium does not balance the network (residual {residual:.3e})"
            )
        return Equilibrium(x_star=state[:-1], y_star=float(state[-1]), u_star=float(u_star))
    return Equilibrium(
        x_star=np.full(model.n, 1.0 / model.rate), y_star=1.0, u_star=1.0
    )


def natural_control(model: PathwayModel, y: float) -> float:
    """The allosteric inhibition law 2/(1+y^(2h)) implemented by the pathway."""
    if isinstance(model, CyclicNetwork):
        raise UnsupportedOperationError("cyclic networks carry no PFK inhibition exponent h")
    return 2.0 / (1.0 + y ** (2.0 * model.h))


@dataclass(frozen=True)
class StabilityMargin:
    lower: float
    value: float
    upper: float
    stable: bool


def two_state_stability_margin(p: TwoStateParams) -> StabilityMargin:
    """Position of h - a inside the window 0 < h - a < (k + g(1+alpha))/alpha."""
    upper = (p.k + p.g * (1.0 + p.alpha)) / p.alpha
    value = p.h - p.a
    return StabilityMargin(lower=0.0, value=value, upper=upper, stable=0.0 < value < upper)
