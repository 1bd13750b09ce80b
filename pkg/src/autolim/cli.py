"""
CLI entry point for autolim.
"""

import csv
import difflib
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from autolim import __version__
from autolim.config import LqrSpec, RunConfig, VerifyOptions, load_config
from autolim.errors import (
    EXIT_OK,
    EXIT_VERIFY,
    AutolimError,
    ConfigError,
    HypothesisViolationError,
)
from autolim.limits import analyze, energy_closed_form, gamma_closed_form, sweep
from autolim.model import CyclicNetwork, equilibrium
from autolim.sim import (
    ConstantController,
    NaturalController,
    empirical_gain,
    energy_run,
    integrate,
    write_trajectory_csv,
)
from autolim.verify import run_suites

# ANSI color codes (no external dependencies)
RESET = "\033[0m"
BOLD = "\033[1m"
GREEN = "\033[32m"
YELLOW = "\033[33m"
RED = "\033[31m"
CYAN = "\033[36m"
DIM = "\033[2m"

ALL_COMMANDS = ["limits", "sweep", "simulate", "verify", "help"]


def supports_color() -> bool:
    if os.environ.get("NO_COLOR") is not None:
        return False
    if os.environ.get("FORCE_COLOR") is not None:
        return True
    return hasattr(sys.stderr, "isatty") and sys.stderr.isatty()


def _c(text: str, *codes: str) -> str:
    if not supports_color():
        return text
    return "".join(codes) + text + RESET


# ─── Help ──────────────────────────────────────────────────────────────────

def print_help() -> None:
    print(
        f"""
{_c("autolim", BOLD, CYAN)} {_c(f"v{__version__}", DIM)}: hard limits of autocatalytic pathways

{_c("USAGE", BOLD)}
  autolim <command> [options]

{_c("COMMANDS", BOLD)}
  {_c("limits", BOLD)}      Closed-form Gamma and H for a model, checked against oracles (JSON)
  {_c("sweep", BOLD)}       Tabulate Gamma and its large-n approximation over a parameter grid (CSV)
  {_c("simulate", BOLD)}    Integrate the nonlinear model under a controller and disturbance
  {_c("verify", BOLD)}      Run the built-in property suites
  {_c("help", BOLD)}        Show this help message

{_c("OPTIONS", BOLD)}
  --config <path>  JSON run config (required except for verify)
  --out <path>     Write the main output here instead of stdout
  --seed <int>     Seed for randomized verify suites (default 42)
  --verbose, -v    Log solver progress to stderr
  --version        Print the version

{_c("EXIT CODES", BOLD)}
  0 success, 1 config or numeric error, 2 hypothesis violation,
  3 integration failure, 4 verification failure

{_c("EXAMPLES", BOLD)}
  autolim limits --config two_state.json
  autolim sweep --config chain_n.json --out chain_n.csv
  autolim simulate --config energy_run.json --out trajectory.csv
  autolim verify --seed 42
"""
    )


def _print_help_limits() -> None:
    print(f"""\
{_c("autolim limits", BOLD)} --config <path> [--out <path>]

  Evaluate every hard limit of the config's model and print the report as JSON.
  With --out the JSON goes to the file and a short summary is printed instead.

  The optional "initial" section ({{"x": [...], "y": ...}}) sets the deviation
  used for H; without it x0 = x* + e1, y0 = y*.
""")


def _print_help_sweep() -> None:
    print(f"""\
{_c("autolim sweep", BOLD)} --config <path> [--out <path>]

  Columns: the axes in declaration order, then gamma_closed, gamma_approx,
  approx_rel_err, energy_coeff, energy_coeff_approx.

  Axes: {{"name": "n", "values": [...]}} or {{"name": "n", "start": 1, "stop": 50, "step": 1}}
  over alpha, k|K, g and (chains only) n.
""")


def _print_help_simulate() -> None:
    print(f"""\
{_c("autolim simulate", BOLD)} --config <path> [--out <path>]

  Integrate the model with fixed-step RK4 and print a JSON summary with the
  output and disturbance energies next to the model's Gamma and H.
  With --out the trajectory is written as CSV (t, x1..xm, y, u, delta).

  Controllers: natural, constant, linear_state_feedback, lqr.
  Disturbances: zero, step, sine, pulse.
  Set "horizon": {{"energy": true}} for a convergence-gated energy run.
""")


def _print_help_verify() -> None:
    print(f"""\
{_c("autolim verify", BOLD)} [--config <path>] [--seed <int>] [--out <path>]

  Run the property suites and print the report as JSON. Exits 4 if any suite fails.
  Select suites by name prefix with {{"verify": {{"suites": ["limits"]}}}}.
  AUTOLIM_TOL_SCALE multiplies every discrepancy tolerance.
""")


_HELP_MAP = {
    "limits": _print_help_limits,
    "sweep": _print_help_sweep,
    "simulate": _print_help_simulate,
    "verify": _print_help_verify,
}


# ─── Utilities ─────────────────────────────────────────────────────────────

def print_error(msg: str) -> None:
    print(_c(f"Error: {msg}", RED), file=sys.stderr)


def configure_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("autolim")
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
    root.propagate = False


def _to_json(doc: Dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot write {out}: {e}") from e


# ─── Argument Parsing ──────────────────────────────────────────────────────

def parse_command_args(args: list, cmd_name: str) -> dict:
    """Parse the options shared by every subcommand."""
    if "--help" in args or "-h" in args:
        _HELP_MAP[cmd_name]()
        sys.exit(EXIT_OK)

    opts = {"config": None, "out": None, "seed": None, "verbose": False}

    i = 0
    while i < len(args):
        arg = args[i]
        if arg in ("--verbose", "-v"):
            opts["verbose"] = True
        elif arg in ("--config", "--out", "--seed"):
            i += 1
            if i >= len(args):
                raise ConfigError(f"{arg} requires a value")
            opts[arg[2:]] = args[i]
        else:
            raise ConfigError(f"Unknown option: {arg}")
        i += 1

    if opts["seed"] is not None:
        try:
            opts["seed"] = int(opts["seed"])
        except ValueError:
            raise ConfigError(f"--seed must be an integer, got {opts['seed']!r}")
    return opts


def _load(opts: dict, cmd_name: str, required: bool = True) -> RunConfig:
    if opts["config"] is None:
        if required:
            raise ConfigError(f"'{cmd_name}' needs --config <path>")
        return RunConfig(command=cmd_name)
    config = load_config(opts["config"])
    if config.command is not None and config.command != cmd_name:
        raise ConfigError(f"config is for '{config.command}', not '{cmd_name}'")
    return config


def _out(opts: dict, config: RunConfig) -> Optional[str]:
    return opts["out"] if opts["out"] is not None else config.out


# ─── Commands ──────────────────────────────────────────────────────────────

def cmd_limits(opts: dict) -> int:
    config = _load(opts, "limits")
    model = config.require_model()
    x0, y0 = None, None
    if config.initial is not None:
        x0, y0 = np.array(config.initial.x), config.initial.y
    report = analyze(model, x0, y0)
    out = _out(opts, config)
    _emit(_to_json(report.to_dict()), out)
    if out is not None:
        print(_c("Done!", GREEN, BOLD))
        print(report.summary())
    return EXIT_OK


def sweep_csv(table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format(v, ".17g") for v in row])
    return buf.getvalue()


def cmd_sweep(opts: dict) -> int:
    config = _load(opts, "sweep")
    if not config.axes:
        raise ConfigError("'sweep' needs an axes section")
    table = sweep(config.require_model(), {a.name: a.values for a in config.axes})
    out = _out(opts, config)
    _emit(sweep_csv(table), out)
    if out is not None:
        print(_c("Done!", GREEN, BOLD))
        print(f"{len(table.rows)} row(s) written to {out}")
    return EXIT_OK


def _simulation_controller(config: RunConfig):
    model = config.require_model()
    controller = config.controller
    if controller is None:
        if isinstance(model, CyclicNetwork):
            return ConstantController(equilibrium(model).u_star)
        return NaturalController()
    if isinstance(controller, LqrSpec):
        return controller.build(model)
    return controller


def cmd_simulate(opts: dict) -> int:
    config = _load(opts, "simulate")
    model = config.require_model()
    eq = equilibrium(model)
    if config.initial is not None:
        x0 = np.append(config.initial.x, config.initial.y)
    else:
        x0 = eq.state
    controller = _simulation_controller(config)
    horizon = config.horizon
    if horizon.energy:
        traj = energy_run(model, controller, x0, horizon.t_end, horizon.dt)
    else:
        traj = integrate(model, controller, config.disturbance, x0, horizon.t_end, horizon.dt)

    gamma = energy = None
    try:
        gamma = gamma_closed_form(model)
    except HypothesisViolationError as e:
        logging.getLogger(__name__).warning("no hard limit for this model: %s", e)
    if not isinstance(model, CyclicNetwork):
        energy = energy_closed_form(model, x0[:-1], x0[-1]).H

    summary = {
        "family": model.family,
        "controller": controller.to_dict(),
        "disturbance": config.disturbance.to_dict(),
        "t_end": float(traj.t[-1]),
        "dt": horizon.dt,
        "l2_y_dev": traj.l2_y_dev,
        "l2_delta": traj.l2_delta,
        "empirical_gain": empirical_gain(traj) if traj.l2_delta > 0 else None,
        "converged": traj.converged,
        "gamma_closed": gamma,
        "energy_closed": energy,
    }
    out = _out(opts, config)
    if out is not None:
        try:
            write_trajectory_csv(traj, out)
        except OSError as e:
            raise ConfigError(f"cannot write {out}: {e}") from e
    sys.stdout.write(_to_json(summary))
    return EXIT_OK


def cmd_verify(opts: dict) -> int:
    config = _load(opts, "verify", required=False)
    options = config.verify
    if opts["seed"] is not None:
        options = VerifyOptions(suites=options.suites, seed=opts["seed"])
    report = run_suites(options)
    _emit(_to_json(report.to_dict()), _out(opts, config))
    if not report.passed:
        failed = [s.name for s in report.suites if not s.passed]
        print_error(f"verification failed: {', '.join(failed)}")
        return EXIT_VERIFY
    return EXIT_OK


_COMMANDS = {
    "limits": cmd_limits,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


# ─── Main ──────────────────────────────────────────────────────────────────

def run(args: list) -> int:
    if not args or args[0] in ("help", "--help", "-h"):
        print_help()
        return EXIT_OK

    if args[0] == "--version":
        print(f"autolim {__version__}")
        return EXIT_OK

    command = args[0]
    if command not in _COMMANDS:
        matches = difflib.get_close_matches(command, ALL_COMMANDS, n=1, cutoff=0.6)
        if matches:
            print_error(f"Unknown command: '{command}'. Did you mean '{matches[0]}'?")
        else:
            print_error(f"Unknown command: '{command}'")
        print("Run 'autolim help' for usage.", file=sys.stderr)
        return ConfigError.exit_code

    try:
        opts = parse_command_args(args[1:], command)
        configure_logging(opts["verbose"])
        return _COMMANDS[command](opts)
    except AutolimError as e:
        sys.stdout.write(_to_json({"status": e.status, "error": type(e).__name__, "message": str(e)}))
        print_error(str(e))
        return e.exit_code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
