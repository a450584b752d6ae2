"""Exception types shared across the library.

The CLI maps these onto exit codes: UsageError -> 2, DataError -> 3,
NumericalError -> 4. Everything else is a bug.
"""


class ParameterDomainError(ValueError):
    """A distribution or operation was given parameters outside its domain."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent."""


class UsageError(ValueError):
    """Bad configuration or command usage."""


class DataError(ValueError):
    """Input data failed to parse or violates a transform's domain."""


class NumericalError(RuntimeError):
    """A numerical routine lost stability beyond repair (after retries)."""
