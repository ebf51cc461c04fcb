"""Exception hierarchy for the AFDM-ICSC simulator."""

from __future__ import annotations


class AfdmError(ValueError):
    """Base class for every error raised by this package."""


class InvalidSizeError(AfdmError):
    pass


class DimensionError(AfdmError):
    pass


class ResourceError(AfdmError):
    """Requested dense object exceeds the configured size limit."""


class DomainError(AfdmError):
    pass


class NoPathError(AfdmError):
    """A DAFT-domain shift does not correspond to any in-bounds path."""


class InfeasibleError(AfdmError):
    pass


class PrefixTooShortError(AfdmError):
    pass


class InsufficientDataError(AfdmError):
    pass


class ConfigMismatchError(AfdmError):
    pass


class ConfigError(AfdmError):
    """Experiment configuration rejected.

    ``reason`` is a short machine-readable code (e.g. ``"orthogonality"``).
    """

    def __init__(self, reason: str, message: str):
        super().__init__(f"[{reason}] {message}")
        self.reason = reason
        self.message = message
