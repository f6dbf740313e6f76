"""Exception types shared across the package."""


class AboError(Exception):
    """Base class for all library errors."""


class InvalidSpecError(AboError, ValueError):
    """A kernel or objective specification violates its invariants."""


class DimensionMismatchError(AboError, ValueError):
    """Input dimensionality does not match the specification."""


class InvalidObservationError(AboError, ValueError):
    """An observation value is not finite."""


class NumericalError(AboError, ArithmeticError):
    """A quadratic form or factorization left the numerically valid range."""


class SingularModelError(AboError, ArithmeticError):
    """Cholesky factorization failed even after jitter escalation."""


class ConfigError(AboError, ValueError):
    """An experiment configuration is malformed or out of range."""
