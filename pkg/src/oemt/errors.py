"""Exception hierarchy shared across the package.

The command line layer maps these onto process exit codes, so new error
types should subclass one of the three categories below rather than
``OEMTError`` directly.
"""

__all__ = [
    "OEMTError",
    "ConfigError",
    "PhysicsError",
    "ModelValidationError",
    "ScheduleError",
    "PresetError",
    "NumericalError",
    "StabilityError",
    "PoleError",
    "SearchError",
]


class OEMTError(Exception):
    """Base class for all package errors."""


class ConfigError(OEMTError):
    """Malformed configuration input (exit code 2)."""


class PhysicsError(OEMTError):
    """Physically inconsistent request (exit code 3)."""


class ModelValidationError(PhysicsError):
    """Model parameters violate a declared invariant."""


class ScheduleError(PhysicsError):
    """Coupling schedule or pulse shape is inconsistent."""


class PresetError(PhysicsError):
    """Unknown preset name."""


class NumericalError(OEMTError):
    """Numerical failure during a computation (exit code 4)."""


class StabilityError(NumericalError):
    """Drift matrix is not strictly stable where stability is required."""


class PoleError(NumericalError):
    """Response kernel evaluated at (or too near) a real-axis pole."""


class SearchError(NumericalError):
    """Parameter search could not produce a valid result."""
