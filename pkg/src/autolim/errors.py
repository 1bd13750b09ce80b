"""
Exception hierarchy for autolim.

Every error carries the exit code the CLI maps it to:

    1  configuration / model / numeric errors
    2  model-hypothesis violations (no hard limit exists or it is undefined)
    3  integration failures
    4  verification failure (reported by the CLI, not raised)
"""

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_INTEGRATION = 3
EXIT_VERIFY = 4


class AutolimError(Exception):
    """Base class for all autolim errors."""

    exit_code = EXIT_CONFIG
    status = "error"


class ConfigError(AutolimError):
    """Raised when a run config is malformed or references bad values."""

    status = "config_error"


class ContractViolation(AutolimError, ValueError):
    """Raised when a caller breaks a documented precondition (shapes, ranges)."""

    status = "contract_violation"


class DomainError(AutolimError, ValueError):
    """Raised when a state leaves the nonnegative orthant."""

    status = "domain_error"


class InvalidModelError(AutolimError, ValueError):
    """Raised when model parameters or a supplied equilibrium are invalid."""

    status = "invalid_model"


class UnsupportedOperationError(AutolimError):
    """Raised when an operation has no meaning for the given model family."""

    status = "unsupported"


class NumericError(AutolimError):
    """Raised when a numerical kernel cannot produce a trustworthy value."""

    status = "numeric_error"


class SpectrumDegeneracyError(NumericError):
    """Raised when a Lyapunov operator is singular."""


class SynthesisError(NumericError):
    """Raised when no stabilizing gain can be constructed."""


class ConvergenceError(NumericError):
    """Raised when an iteration stalls above its tolerance."""


class BracketError(NumericError):
    """Raised when a root search interval does not bracket a sign change."""


class UndefinedRatioError(AutolimError):
    """Raised when an empirical gain is requested for a zero-energy disturbance."""

    status = "undefined_ratio"


class HypothesisViolationError(AutolimError):
    """Raised when a model falls outside the hypotheses a hard limit needs."""

    exit_code = EXIT_HYPOTHESIS
    status = "hypothesis_violation"


class AssumptionViolationError(HypothesisViolationError):
    """Raised when a cyclic network's f_i'(x_i*) do not share a common value."""


class NoUnstableModeError(HypothesisViolationError):
    """Raised when r <= a: the zero dynamics have no unstable mode."""


class DegenerateControlError(HypothesisViolationError):
    """Raised when the output cannot act on the dominant mode (v'B == 0)."""


class IntegrationError(AutolimError):
    """Raised when a simulation cannot be completed."""

    exit_code = EXIT_INTEGRATION
    status = "integration_error"


class PositivityError(IntegrationError):
    """Raised when an RK4 step or stage drives a concentration below -1e-9."""

    def __init__(self, time: float, component: int, value: float):
        self.time = time
        self.component = component
        self.value = value
        super().__init__(
            f"state component {component} became negative ({value:.3e}) at t={time:.6g}"
        )


class BlowUpError(IntegrationError):
    """Raised when the state becomes non-finite."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"state became non-finite at t={time:.6g}")


class TruncationError(IntegrationError):
    """Raised when an energy run keeps a heavy tail after all horizon doublings."""
