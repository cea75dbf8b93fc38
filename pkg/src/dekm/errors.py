"""Exception types shared across the package."""


class DekmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(DekmError):
    """Operands have incompatible shapes."""


class ConfigurationError(DekmError):
    """A parameter value is invalid or inconsistent."""


class NumericError(DekmError):
    """Non-finite values where finite ones are required."""


class ConvergenceError(DekmError):
    """An iterative solver exhausted its budget without converging."""


class DivergenceError(DekmError):
    """A training loss became non-finite."""


class FormatError(DekmError):
    """A file does not conform to its expected format."""
