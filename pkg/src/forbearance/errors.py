"""Exception types shared across the package.

Everything raised for a violated model invariant derives from ``DomainError``
so the command-line layer can map it to a single exit status.
"""


class DomainError(ValueError):
    """An input violates a model invariant or lies outside a function's domain."""


class DegenerateError(DomainError):
    """A ratio or normalisation is undefined because its denominator vanishes."""


class SingularSystemError(DomainError):
    pass


class DivergenceError(DomainError):
    """Numerical integration produced a non-finite state."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class RankDeficiencyError(DomainError):
    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class ObservationFormatError(DomainError):
    """A row in an observation file is malformed or out of bounds."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        super().__init__(message)
        self.line = line
        self.field = field
