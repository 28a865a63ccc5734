"""Exception hierarchy shared across the package.

CLI exit codes: ConfigError maps to 2, numeric failures (everything deriving
from NumericError) map to 3.
"""


class BosonicMipError(Exception):
    """Base class for all package errors."""


class ConfigError(BosonicMipError):
    """Invalid configuration, model file, or CLI usage."""


class InvalidDimensionError(ConfigError):
    """Mode truncation dimension below 2 or inconsistent with an operand."""


class UnsupportedMonomialError(ConfigError):
    """Operator monomial mixes different primitives on one mode."""


class IntegerizationError(ConfigError):
    """Constraint coefficients cannot be scaled to integers."""


class UnsupportedModelError(ConfigError):
    """Model feature outside the supported MIP fragment."""


class SearchSpaceError(ConfigError):
    """Brute-force enumeration space exceeds the configured cap."""


class NumericError(BosonicMipError):
    """Base class for runtime numerical failures."""


class TruncationError(NumericError):
    """State preparation leaked too much norm past the truncation level."""

    def __init__(self, message, leak=None):
        super().__init__(message)
        self.leak = leak


class PropagatorError(NumericError):
    """Matrix-exponential action failed to converge or produced NaNs."""


class ConditioningError(NumericError):
    """Conditional state has (numerically) zero probability."""
