"""
JSON run configs.

A config document looks like::

    {
      "command": "simulate",
      "model": {"family": "two_state", "alpha": 1, "k": 1, "g": 1, "h": 3, "a": 1},
      "initial": {"x": [2.0], "y": 1.0},
      "controller": {"kind": "natural"},
      "disturbance": {"kind": "zero"},
      "horizon": {"t_end": 200, "dt": 0.001, "energy": true}
    }

Sweeps add ``"axes": [{"name": "n", "values": [1, 2, 3]}]`` (or ``start`` /
``stop`` / ``step`` instead of ``values``); verify runs take
``"verify": {"suites": ["limits"], "seed": 42}``. Every section rejects
unknown keys.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, ClassVar, Dict, Iterable, Optional, Tuple, Union

from autolim.errors import ConfigError
from autolim.model import (
    ChainParams,
    CyclicNetwork,
    PathwayModel,
    RateFunction,
    TwoStateParams,
)
from autolim.sim import (
    ConstantController,
    ControllerSpec,
    DisturbanceSpec,
    LinearStateFeedback,
    NaturalController,
    PulseDisturbance,
    SineDisturbance,
    StepDisturbance,
    ZeroDisturbance,
    lqr_controller,
)

COMMANDS = ("limits", "sweep", "simulate", "verify")
DEFAULT_SEED = 42


def _check_keys(doc: Any, section: str, allowed: Iterable[str], required: Iterable[str] = ()) -> Dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{section} must be a JSON object")
    allowed = set(allowed)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ConfigError(f"missing key(s) in {section}: {', '.join(missing)}")
    return doc


def _number(doc: Dict, key: str, section: str, default: Optional[float] = None) -> float:
    if key not in doc:
        if default is None:
            raise ConfigError(f"missing key in {section}: {key}")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return float(value)


def _integer(doc: Dict, key: str, section: str, default: Optional[int] = None) -> int:
    if key not in doc and default is not None:
        return default
    value = _number(doc, key, section)
    if value != int(value):
        raise ConfigError(f"{section}.{key} must be an integer, got {doc[key]!r}")
    return int(value)


def _numbers(value: Any, section: str) -> Tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{section} must be a list of numbers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{section}[{i}] must be a finite number, got {v!r}")
        out.append(float(v))
    return tuple(out)


# ─── Model ─────────────────────────────────────────────────────────────────

def parse_rate(doc: Any, section: str) -> RateFunction:
    _check_keys(doc, section, ("kind", "c", "p"), ("kind", "c"))
    kind = doc["kind"]
    if kind != "power" and "p" in doc:
        raise ConfigError(f"{section}.p is only valid for power rates")
    return RateFunction(kind, _number(doc, "c", section), _number(doc, "p", section, 1.0))


def parse_model(doc: Any) -> PathwayModel:
    if not isinstance(doc, dict) or "family" not in doc:
        raise ConfigError("model must be an object with a 'family' key")
    family = doc["family"]
    if family == "two_state":
        _check_keys(doc, "model", ("family", "alpha", "k", "g", "h", "a"), ("alpha", "k"))
        return TwoStateParams(
            alpha=_number(doc, "alpha", "model"),
            k=_number(doc, "k", "model"),
            g=_number(doc, "g", "model", 0.0),
            h=_number(doc, "h", "model", 0.0),
            a=_number(doc, "a", "model", 0.0),
        )
    if family == "chain":
        _check_keys(doc, "model", ("family", "alpha", "K", "n", "g", "h", "a"), ("alpha", "K", "n"))
        return ChainParams(
            alpha=_number(doc, "alpha", "model"),
            K=_number(doc, "K", "model"),
            n=_integer(doc, "n", "model"),
            g=_number(doc, "g", "model", 0.0),
            h=_number(doc, "h", "model", 0.0),
            a=_number(doc, "a", "model", 0.0),
        )
    if family == "cyclic":
        _check_keys(doc, "model", ("family", "alpha", "nodes", "sink", "equilibrium"),
                    ("alpha", "nodes", "sink", "equilibrium"))
        if not isinstance(doc["nodes"], list):
            raise ConfigError("model.nodes must be a list of {f, g} objects")
        nodes = []
        for i, node in enumerate(doc["nodes"]):
            section = f"model.nodes[{i}]"
            _check_keys(node, section, ("f", "g"), ("f", "g"))
            nodes.append((parse_rate(node["f"], f"{section}.f"), parse_rate(node["g"], f"{section}.g")))
        return CyclicNetwork(
            alpha=_number(doc, "alpha", "model"),
            nodes=tuple(nodes),
            sink=parse_rate(doc["sink"], "model.sink"),
            equilibrium=_numbers(doc["equilibrium"], "model.equilibrium"),
        )
    raise ConfigError(f"unknown model family {family!r} (expected two_state, chain or cyclic)")


# ─── Sections ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class InitialCondition:
    x: Tuple[float, ...]
    y: float

    def to_dict(self) -> Dict:
        return {"x": list(self.x), "y": self.y}


@dataclass(frozen=True)
class AxisSpec:
    name: str
    values: Tuple[float, ...]

    def to_dict(self) -> Dict:
        return {"name": self.name, "values": list(self.values)}


@dataclass(frozen=True)
class HorizonSpec:
    t_end: float = 200.0
    dt: float = 1e-3
    energy: bool = False

    def to_dict(self) -> Dict:
        return {"t_end": self.t_end, "dt": self.dt, "energy": self.energy}


@dataclass(frozen=True)
class LqrSpec:
    """LQR feedback resolved against the model at run time."""

    kind: ClassVar[str] = "lqr"

    q: float = 1.0
    r: float = 1.0

    def build(self, model: PathwayModel) -> LinearStateFeedback:
        return lqr_controller(model, self.q, self.r)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "q": self.q, "r": self.r}


@dataclass(frozen=True)
class VerifyOptions:
    suites: Tuple[str, ...] = ()
    seed: int = DEFAULT_SEED

    def to_dict(self) -> Dict:
        return {"suites": list(self.suites), "seed": self.seed}


def parse_initial(doc: Any) -> InitialCondition:
    _check_keys(doc, "initial", ("x", "y"), ("x", "y"))
    return InitialCondition(x=_numbers(doc["x"], "initial.x"), y=_number(doc, "y", "initial"))


def parse_axes(doc: Any) -> Tuple[AxisSpec, ...]:
    if not isinstance(doc, list) or not doc:
        raise ConfigError("axes must be a non-empty list")
    axes = []
    for i, axis in enumerate(doc):
        section = f"axes[{i}]"
        _check_keys(axis, section, ("name", "values", "start", "stop", "step"), ("name",))
        if not isinstance(axis["name"], str):
            raise ConfigError(f"{section}.name must be a string")
        if "values" in axis:
            if any(k in axis for k in ("start", "stop", "step")):
                raise ConfigError(f"{section} takes either values or start/stop/step")
            values = _numbers(axis["values"], f"{section}.values")
        else:
            start = _number(axis, "start", section)
            stop = _number(axis, "stop", section)
            step = _number(axis, "step", section, 1.0)
            if not step > 0 or stop < start:
                raise ConfigError(f"{section} needs start <= stop and step > 0")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = tuple(start + i * step for i in range(count))
        if not values:
            raise ConfigError(f"{section} ({axis['name']}) is empty")
        axes.append(AxisSpec(name=axis["name"], values=values))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate sweep axis in {names}")
    return tuple(axes)


def parse_controller(doc: Any) -> Union[ControllerSpec, LqrSpec]:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("controller must be an object with a 'kind' key")
    kind = doc["kind"]
    if kind == "natural":
        _check_keys(doc, "controller", ("kind",))
        return NaturalController()
    if kind == "constant":
        _check_keys(doc, "controller", ("kind", "value"), ("value",))
        return ConstantController(_number(doc, "value", "controller"))
    if kind == "linear_state_feedback":
        _check_keys(doc, "controller", ("kind", "gain", "offset"), ("gain",))
        offset = doc.get("offset")
        return LinearStateFeedback(
            gain=_numbers(doc["gain"], "controller.gain"),
            offset=None if offset is None else _number(doc, "offset", "controller"),
        )
    if kind == "lqr":
        _check_keys(doc, "controller", ("kind", "q", "r"))
        q = _number(doc, "q", "controller", 1.0)
        r = _number(doc, "r", "controller", 1.0)
        if not (q > 0 and r > 0):
            raise ConfigError("controller.q and controller.r must be positive")
        return LqrSpec(q=q, r=r)
    raise ConfigError(
        f"unknown controller kind {kind!r} (expected natural, constant, linear_state_feedback or lqr)"
    )


def parse_disturbance(doc: Any) -> DisturbanceSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("disturbance must be an object with a 'kind' key")
    kind = doc["kind"]
    s = "disturbance"
    if kind == "zero":
        _check_keys(doc, s, ("kind",))
        return ZeroDisturbance()
    if kind == "step":
        _check_keys(doc, s, ("kind", "magnitude", "onset"), ("magnitude",))
        return StepDisturbance(_number(doc, "magnitude", s), _number(doc, "onset", s, 0.0))
    if kind == "sine":
        _check_keys(doc, s, ("kind", "amplitude", "omega", "start", "stop"),
                    ("amplitude", "omega", "stop"))
        return SineDisturbance(_number(doc, "amplitude", s), _number(doc, "omega", s),
                               _number(doc, "start", s, 0.0), _number(doc, "stop", s))
    if kind == "pulse":
        _check_keys(doc, s, ("kind", "magnitude", "start", "stop"), ("magnitude", "stop"))
        return PulseDisturbance(_number(doc, "magnitude", s), _number(doc, "start", s, 0.0),
                                _number(doc, "stop", s))
    raise ConfigError(f"unknown disturbance kind {kind!r} (expected zero, step, sine or pulse)")


def parse_horizon(doc: Any) -> HorizonSpec:
    _check_keys(doc, "horizon", ("t_end", "dt", "energy"))
    energy = doc.get("energy", False)
    if not isinstance(energy, bool):
        raise ConfigError("horizon.energy must be true or false")
    spec = HorizonSpec(
        t_end=_number(doc, "t_end", "horizon", HorizonSpec.t_end),
        dt=_number(doc, "dt", "horizon", HorizonSpec.dt),
        energy=energy,
    )
    if not (spec.t_end > 0 and spec.dt > 0):
        raise ConfigError("horizon.t_end and horizon.dt must be positive")
    if spec.dt > spec.t_end / 10.0:
        raise ConfigError("horizon.dt must be at most t_end/10")
    return spec


def parse_verify(doc: Any) -> VerifyOptions:
    _check_keys(doc, "verify", ("suites", "seed"))
    suites = doc.get("suites", [])
    if not isinstance(suites, list) or not all(isinstance(s, str) for s in suites):
        raise ConfigError("verify.suites must be a list of suite names or prefixes")
    return VerifyOptions(suites=tuple(suites), seed=_integer(doc, "seed", "verify", DEFAULT_SEED))


# ─── RunConfig ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RunConfig:
    command: Optional[str] = None
    model: Optional[PathwayModel] = None
    initial: Optional[InitialCondition] = None
    axes: Tuple[AxisSpec, ...] = ()
    controller: Optional[Union[ControllerSpec, LqrSpec]] = None
    disturbance: DisturbanceSpec = ZeroDisturbance()
    horizon: HorizonSpec = HorizonSpec()
    out: Optional[str] = None
    verify: VerifyOptions = VerifyOptions()

    def to_dict(self) -> Dict:
        doc: Dict[str, Any] = {}
        if self.command is not None:
            doc["command"] = self.command
        if self.model is not None:
            doc["model"] = self.model.to_dict()
        if self.initial is not None:
            doc["initial"] = self.initial.to_dict()
        if self.axes:
            doc["axes"] = [a.to_dict() for a in self.axes]
        if self.controller is not None:
            doc["controller"] = self.controller.to_dict()
        doc["disturbance"] = self.disturbance.to_dict()
        doc["horizon"] = self.horizon.to_dict()
        if self.out is not None:
            doc["out"] = self.out
        doc["verify"] = self.verify.to_dict()
        return doc

    def require_model(self) -> PathwayModel:
        if self.model is None:
            raise ConfigError(f"'{self.command}' needs a model section")
        return self.model


def parse_config(doc: Any) -> RunConfig:
    _check_keys(doc, "config", ("command", "model", "initial", "axes", "controller",
                                "disturbance", "horizon", "out", "verify"))
    command = doc.get("command")
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} (expected one of {', '.join(COMMANDS)})")
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a path string")
    return RunConfig(
        command=command,
        model=parse_model(doc["model"]) if "model" in doc else None,
        initial=parse_initial(doc["initial"]) if "initial" in doc else None,
        axes=parse_axes(doc["axes"]) if "axes" in doc else (),
        controller=parse_controller(doc["controller"]) if "controller" in doc else None,
        disturbance=parse_disturbance(doc["disturbance"]) if "disturbance" in doc else ZeroDisturbance(),
        horizon=parse_horizon(doc["horizon"]) if "horizon" in doc else HorizonSpec(),
        out=out,
        verify=parse_verify(doc["verify"]) if "verify" in doc else VerifyOptions(),
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return parse_config(doc)
