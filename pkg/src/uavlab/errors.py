"""Exception types shared across the package."""


class UavLabError(Exception):
    """Base class for all package errors."""


class ConfigError(UavLabError, ValueError):
    """Invalid or unknown configuration."""


class ValidationError(UavLabError, ValueError):
    """Input data failed a precondition."""


class FormatError(ValidationError):
    """Persisted file is malformed: bad magic, truncation or checksum mismatch."""


class InfeasibleError(ValidationError):
    """No geometry satisfies the coverage threshold."""


class DivergenceError(UavLabError, ArithmeticError):
    """Training produced a non-finite loss."""
