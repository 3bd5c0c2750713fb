"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class HopfAlgebraError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class Violation:
    """One failed invariant: which one, where, and how badly."""

    invariant: str
    location: str
    residual: float

    def __str__(self) -> str:
        return f"{self.invariant} at {self.location}: residual {self.residual:.3e}"


class ValidationError(HopfAlgebraError):
    """Instance data violates a structural rule or a named axiom."""

    def __init__(self, violations, message=None):
        self.violations = tuple(violations)
        if message is None:
            shown = "; ".join(str(v) for v in self.violations[:8])
            extra = "" if len(self.violations) <= 8 else f" (+{len(self.violations) - 8} more)"
            message = f"{len(self.violations)} invariant violation(s): {shown}{extra}"
        super().__init__(message)


class MarginalClassificationError(HopfAlgebraError):
    """An evaluation fell into the guard band around a membership boundary."""


class ConsistencyError(HopfAlgebraError):
    """A theorem-level cross-check failed, which signals corrupted instance data."""


class PositivityError(HopfAlgebraError):
    """The central-subspace form has a significantly negative eigenvalue."""
