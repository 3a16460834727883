"""Shared exception types."""


class OncillaError(Exception):
    """Base class for all package errors."""


class ConfigError(OncillaError, ValueError):
    """A parameter or configuration value is out of its allowed range."""


class ValidationError(OncillaError, ValueError):
    """Input data fails a structural check (non-periodic trajectory, bad
    frame hex, malformed document)."""


class WorkspaceError(OncillaError, ValueError):
    """A foot target or joint command violates the leg workspace.

    The message names the violated limit.
    """


class SimulationError(OncillaError, RuntimeError):
    """Simulation aborted; carries the timestamp and leg that failed."""

    def __init__(self, message, t=None, leg=None):
        super().__init__(message)
        self.t = t
        self.leg = leg


class InsufficientYawError(OncillaError, ValueError):
    """Log does not contain enough net yaw for turning metrics."""


class InfeasibleLoadError(OncillaError, ValueError):
    """Demanded torque exceeds the motor envelope; names joint and phase."""

    def __init__(self, message, joint=None, phase=None):
        super().__init__(message)
        self.joint = joint
        self.phase = phase
