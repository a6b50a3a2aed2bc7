"""Exception types raised by the model."""

from __future__ import annotations


class ModelError(ValueError):
    """Base class for model-level failures (CLI exit code 1).

    ``param`` optionally names the input responsible for the failure.
    """

    def __init__(self, message: str, param: str | None = None):
        super().__init__(message)
        self.param = param


class OutOfSupportError(ModelError):
    """A traversal time lies outside the geometric time support."""


class UnachievableError(ModelError):
    """A probability target needs more mass than the distribution holds below the latency."""


class DomainError(ModelError):
    """A baseline formula is evaluated outside its real-valued domain."""


class NoContourError(ModelError):
    """A coverage contour would lie inside the reference distance."""
