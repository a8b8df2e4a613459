"""Error types shared by every stage of the pipeline."""

from typing import Optional


class SkySigError(Exception):
    """Base class for all pipeline errors."""


class DataValidationError(SkySigError, ValueError):
    """Raised when input data or configuration is malformed.

    Carries optional provenance so the CLI can report ``file:line: message``.
    """

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def __str__(self) -> str:
        if self.source and self.line is not None:
            return f"{self.source}:{self.line}: {self.message}"
        if self.source:
            return f"{self.source}: {self.message}"
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


class DegenerateGeometryError(DataValidationError):
    """Coincident stars joined by a link, or collinear overlapping arcs."""


class EmptyFigureError(DataValidationError):
    """A line figure lost all of its edges during faint-star pruning."""


class StaleArtifactError(DataValidationError):
    """An upstream artifact is missing or its content hash changed."""


class NumericalFailure(SkySigError, ArithmeticError):
    """Raised when a numerical procedure cannot produce a defined result."""
