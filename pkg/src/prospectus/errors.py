"""Exception hierarchy shared across the package."""


class ProspectusError(Exception):
    """Base class for all errors raised by this package."""


class InvalidProspectError(ProspectusError):
    """An outcome distribution violates its construction invariants."""


class DomainError(ProspectusError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidSetupError(ProspectusError):
    """An experiment or estimation setup is inconsistent or inadmissible."""


class QuadratureError(ProspectusError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float = float("nan"),
                 error_estimate: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class ConvergenceError(ProspectusError):
    """An iterative solver terminated without a valid solution."""


class SeparationError(ProspectusError):
    """Choice data exhibits perfect prediction; coefficients diverge."""


class IdentifiabilityError(ProspectusError):
    """The data cannot identify one or more requested parameters."""


class SchemaError(ProspectusError):
    """An input file does not conform to its documented schema."""
