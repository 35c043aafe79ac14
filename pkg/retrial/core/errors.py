"""Exception hierarchy.

Every class also derives from the closest built-in so callers can keep
catching ``ValueError`` / ``FileNotFoundError`` / ``RuntimeError``.
"""

from __future__ import annotations

from typing import Optional


class RetrialError(Exception):
    """Base class for all retrial errors."""


class ValidationError(RetrialError, ValueError):
    """Malformed value or out-of-range argument."""


class UsageError(RetrialError, RuntimeError):
    """API used in a state that does not allow the call."""


class ConfigurationError(RetrialError, ValueError):
    """Inconsistent or unsatisfiable configuration."""


class DatasetFormatError(RetrialError, ValueError):
    """File could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionError(DatasetFormatError):
    """File declares a format version this build does not read."""


class TrainingError(RetrialError, RuntimeError):
    """Optimisation diverged."""

    def __init__(self, message: str, step: int) -> None:
        self.step = step
        super().__init__(f"step {step}: {message}")


class ArtifactError(RetrialError, FileNotFoundError):
    """A required input artefact (dataset, model) is missing."""
