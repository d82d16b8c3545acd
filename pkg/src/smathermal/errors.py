"""Exception types raised across the package."""


class SMAThermalError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(SMAThermalError, ValueError):
    """Nonpositive or inconsistent radii/lengths."""


class InvalidParameterError(SMAThermalError, ValueError):
    """A physical or numerical parameter is outside its valid range."""


class StabilityError(SMAThermalError, ValueError):
    """Explicit Euler step size exceeds the stability bound of a node."""


class SimulationError(SMAThermalError, RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, message, last_valid_time=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class ConfigError(SMAThermalError, ValueError):
    """Malformed configuration file (missing keys, missing unit labels...)."""
