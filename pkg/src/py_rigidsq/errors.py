"""Exception types shared by the computation modules and the CLI."""

from __future__ import annotations


class RigidSqError(Exception):
    """Base class for every error raised by py-rigidsq."""


class DomainError(RigidSqError):
    """Wrong base ring, mismatched shapes or variables, non-invertible input."""


class UnsupportedRingError(DomainError):
    """The ring lies outside both arithmetic regimes (e.g. ZZ[x] without monic relations)."""


class WindowError(RigidSqError):
    """A requested degree is outside the window a computation can vouch for."""

    def __init__(self, message: str, degree: int | None = None,
                 window: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.degree = degree
        self.window = window


class UndeterminedError(WindowError):
    """Cohomology in this degree cannot be determined from the truncated data."""


class CertificateError(RigidSqError):
    """A required certificate is missing or fails verification."""

    def __init__(self, message: str, failing: dict[str, list[int]] | None = None) -> None:
        super().__init__(message)
        self.failing = failing or {}


class LiftError(RigidSqError):
    """A lift or linear solve has no solution within the window."""


class ParseError(RigidSqError):
    """Malformed declaration input; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")
