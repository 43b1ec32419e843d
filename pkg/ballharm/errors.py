from __future__ import annotations


class BallharmError(RuntimeError):
    """Base class for every error raised by the package."""


class ParameterError(BallharmError, ValueError):
    pass


class QuadratureError(BallharmError):
    pass


class ReliabilityError(BallharmError):
    """A coefficient moved by more than the tolerance when the rule was refined."""

    def __init__(self, message: str, max_shift: float | None = None):
        super().__init__(message)
        self.max_shift = max_shift


class ConfigError(BallharmError):
    def __init__(self, message: str, messages: dict | None = None):
        super().__init__(message)
        self.messages = messages or {}
