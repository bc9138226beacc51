"""Exception types raised by the dynamics package."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class LimitLabError(Exception):
    """Base class for every error raised by limitlab."""


class MalformedPointError(LimitLabError, ValueError):
    """A point references an unknown edge or lies outside [0, 1]."""


class EmptySetError(LimitLabError, ValueError):
    """An operation that needs a non-empty set received an empty one."""


class MalformedMapError(LimitLabError, ValueError):
    """A piecewise-affine map is discontinuous, partial or leaves the tree.

    ``edge``, ``at`` and ``vertex`` locate the fault when it is known.
    """

    def __init__(
        self,
        message: str,
        *,
        edge: str | None = None,
        at: Fraction | None = None,
        vertex: str | None = None,
    ) -> None:
        self.edge = edge
        self.at = at
        self.vertex = vertex
        super().__init__(message)


class BudgetExceededError(LimitLabError):
    """A configured enumeration budget was exhausted."""

    def __init__(self, budget: str, limit: int, detail: str = "") -> None:
        self.budget = budget
        self.limit = limit
        message = f"{budget} budget of {limit} exceeded"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class PolicyDeadEndError(LimitLabError):
    """A branch policy reached a point without preimages."""

    def __init__(self, level: int, point: object) -> None:
        self.level = level
        self.point = point
        super().__init__(f"negative orbit dead-ends at level {level} (point {point})")


@dataclass(frozen=True)
class Diagnostic:
    """One located problem found while parsing a system description."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class DescriptionError(LimitLabError, ValueError):
    """A system description failed validation."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(item) for item in diagnostics))
