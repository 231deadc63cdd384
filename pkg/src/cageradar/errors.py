"""Exception types shared across the package.

Every error carries a stable ``code`` string so the CLI can emit one
machine-readable diagnostic line without parsing prose messages.
"""


class CageRadarError(Exception):
    """Base class for package errors.

    ``code`` is a short stable identifier (e.g. ``invalid-config``,
    ``scene-exhausted``); the message is free-form.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ConfigError(CageRadarError):
    """Invalid radar configuration or configuration/mode mismatch."""

    def __init__(self, code: str, message: str, field: str | None = None):
        super().__init__(code, message)
        self.field = field


class SceneError(CageRadarError):
    """Invalid scene description or scene/config mismatch."""


class DspError(CageRadarError):
    """Invalid spectral-processing request (padding, shapes, state)."""


class VitalsError(CageRadarError):
    """Vital-sign extraction cannot proceed on the given input."""


class TrackingError(CageRadarError):
    """Tracking/classification cannot proceed on the given input."""


class StreamError(CageRadarError):
    """Malformed or inconsistent frame-stream file."""


class HarnessError(CageRadarError):
    """Scenario-runner or metrics-level failure."""
