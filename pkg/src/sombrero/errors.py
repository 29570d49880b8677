"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat and
stable.
"""


class SombreroError(Exception):
    """Base class for package-specific failures."""


class InputError(SombreroError, ValueError):
    """Invalid argument or malformed domain object."""


class CapacityError(SombreroError):
    """Problem size exceeds the exhaustive-enumeration cap."""


class GenerationError(SombreroError):
    """Random instance generation exhausted its attempt budget."""

    def __init__(self, message, missing_solutions=None):
        super().__init__(message)
        self.missing_solutions = missing_solutions or []


class ParseError(SombreroError):
    """A DIMACS or config file could not be parsed."""


class StateError(SombreroError):
    """Operation requires state the object does not carry (e.g. no solution)."""


class AccuracyError(SombreroError):
    """A numerical tolerance was violated (norm drift, residuals)."""


class DegenerateGapError(SombreroError):
    """The spectral gap vanished where a nonzero gap is required."""
