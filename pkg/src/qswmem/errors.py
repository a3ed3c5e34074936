"""Exception types shared across the package.

Validation problems (bad configs, mismatched dimensions, out-of-domain
arguments) are ValueError subclasses; numerical failures during a run are
RuntimeError subclasses.  The CLI maps the two families to distinct exit
codes.
"""


class ConfigurationError(ValueError):
    """A configuration value is inconsistent or out of range."""


class DimensionError(ValueError):
    """Operands have incompatible shapes or lengths."""


class StateError(ValueError):
    """A quantum state violates its contract (norm, trace, positivity)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed at runtime."""


class StabilityError(NumericalError):
    """The requested integration step is too large for the system."""


class IntegrationDivergedError(NumericalError):
    """An integrator left the physically valid region beyond tolerance."""


class FitFailureError(NumericalError):
    """A curve fit could not be performed; carries raw data for diagnosis."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class NonConvergenceError(NumericalError):
    """Iterative retrieval did not reach a fixed point; keeps the last state."""

    def __init__(self, message, last_state=None, sweeps=None):
        super().__init__(message)
        self.last_state = last_state
        self.sweeps = sweeps
