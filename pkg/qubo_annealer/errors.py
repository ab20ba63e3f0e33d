"""
Exception types raised by the solver, the formulators and the loaders.

All of them derive from ``ValueError`` so callers that only guard against bad
input keep working without importing this module.
"""

from __future__ import annotations


class QuboError(ValueError):
    """Base class for every error raised by qubo_annealer."""


class ModelError(QuboError):
    """Invalid model assembly or a state that does not fit the model."""


class InfeasibleStateError(QuboError):
    """A state violates the one-hot block structure required by the move set."""

    def __init__(self, message: str, blocks: list[int] | None = None) -> None:
        super().__init__(message)
        self.blocks: list[int] = list(blocks or [])


class GraphFormatError(QuboError):
    """Malformed graph input. ``line`` is the 1-based line (or CSV row) at fault."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyGraphError(QuboError):
    """The graph has no edges, so 2m = 0 and modularity is undefined."""
