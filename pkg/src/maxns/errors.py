"""Exception hierarchy shared by the numerical modules and the CLI."""


class MaxnsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MaxnsError, ValueError):
    """Invalid input; ``field`` names the offending field path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ConfigurationError(ValidationError):
    """Solver configuration that violates a precondition (CFL, resolution)."""


class GeometryError(ValidationError):
    """Subinterval or support placement that violates a geometric precondition."""


class NumericalError(MaxnsError, RuntimeError):
    """A computation could not reach its contract (singular matrix, no convergence)."""

    def __init__(self, message, **details):
        self.details = details
        if details:
            extra = ", ".join(f"{k}={v!r}" for k, v in details.items())
            message = f"{message} ({extra})"
        super().__init__(message)


class DegenerateNormalizerError(NumericalError):
    pass


class SimplicityViolation(NumericalError):
    pass


class SingularGramianError(NumericalError):
    pass


class NearSingularFrameError(NumericalError):
    pass
