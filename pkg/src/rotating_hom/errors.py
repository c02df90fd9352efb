"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (orders tried, error estimates, iteration counts).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ResourceError(RuntimeError):
    """The requested problem size exceeds what the routine will allocate."""


class FitError(NumericalError):
    """A least-squares fit did not converge or is degenerate."""


class GroupingError(ValueError):
    """Records could not be paired into clockwise/anticlockwise sets."""


class ConfigError(ValueError):
    """Invalid configuration file or value; ``line`` points into the file when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
