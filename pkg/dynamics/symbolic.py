"""Binary sequence space with the 2^-N metric and three exact point forms."""

from __future__ import annotations

import logging
import math
import re
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

from dynamics.errors import EmptySetError, MalformedPointError
from dynamics.space import FiniteSet

logger = logging.getLogger(__name__)


class SymbolicKind(StrEnum):
    EVENTUALLY_ZERO = "eventually_zero"
    SHIFTED_Z = "shifted_z"
    ZERO_PADDED_Z = "zero_padded_z"


def z_coordinate(n: int) -> int:
    """Coordinate ``n`` (1-based) of Z = 1 0 1 00 1 000 1 ...; ones sit at n(n+1)/2."""
    if n < 1:
        raise MalformedPointError("sequence coordinates are 1-based")
    root = math.isqrt(8 * n + 1)
    return 1 if root * root == 8 * n + 1 else 0


def k_formula(n: int) -> int:
    """Shift count after which Z shows a one preceded by ``n`` zeros."""
    if n < 1:
        raise ValueError("n must be positive")
    return n * (n - 1) // 2 + n


@dataclass(frozen=True, order=True)
class SymbolicPoint:
    """One infinite binary sequence.

    ``eventually_zero`` stores its finite prefix (trailing zeros stripped),
    ``shifted_z`` stores ``(k,)`` for sigma^k(Z) and ``zero_padded_z`` stores
    ``(i,)`` for i zeros followed by Z.
    """

    kind: SymbolicKind
    payload: tuple[int, ...]

    @classmethod
    def eventually_zero(cls, prefix: Iterable[int]) -> SymbolicPoint:
        digits = list(prefix)
        if any(d not in (0, 1) for d in digits):
            raise MalformedPointError("symbolic digits must be 0 or 1")
        while digits and digits[-1] == 0:
            digits.pop()
        return cls(SymbolicKind.EVENTUALLY_ZERO, tuple(digits))

    @classmethod
    def shifted_z(cls, k: int = 0) -> SymbolicPoint:
        if k < 0:
            raise MalformedPointError("shift offset must be non-negative")
        return cls(SymbolicKind.SHIFTED_Z, (k,))

    @classmethod
    def zero_padded_z(cls, i: int) -> SymbolicPoint:
        if i < 1:
            raise MalformedPointError("zero padding must be at least 1")
        return cls(SymbolicKind.ZERO_PADDED_Z, (i,))

    def coordinate(self, n: int) -> int:
        if n < 1:
            raise MalformedPointError("sequence coordinates are 1-based")
        if self.kind is SymbolicKind.EVENTUALLY_ZERO:
            return self.payload[n - 1] if n <= len(self.payload) else 0
        if self.kind is SymbolicKind.SHIFTED_Z:
            return z_coordinate(n + self.payload[0])
        pad = self.payload[0]
        return 0 if n <= pad else z_coordinate(n - pad)

    def prefix(self, m: int) -> tuple[int, ...]:
        return tuple(self.coordinate(n) for n in range(1, m + 1))

    def shift(self) -> SymbolicPoint:
        if self.kind is SymbolicKind.EVENTUALLY_ZERO:
            return SymbolicPoint.eventually_zero(self.payload[1:])
        if self.kind is SymbolicKind.SHIFTED_Z:
            return SymbolicPoint.shifted_z(self.payload[0] + 1)
        pad = self.payload[0]
        return SymbolicPoint.shifted_z(0) if pad == 1 else SymbolicPoint.zero_padded_z(pad - 1)

    def _support_horizon(self) -> int:
        """Index after which the sequence is zero or follows Z's widening gaps."""
        if self.kind is SymbolicKind.EVENTUALLY_ZERO:
            return len(self.payload)
        return self.payload[0]

    def __str__(self) -> str:
        if self.kind is SymbolicKind.EVENTUALLY_ZERO:
            digits = self.payload
            if not digits:
                return "T0"
            if digits.count(1) == 1 and digits[-1] == 1:
                return f"T{len(digits)}"
            return "EZ:" + "".join(str(d) for d in digits)
        if self.kind is SymbolicKind.SHIFTED_Z:
            k = self.payload[0]
            return "Z" if k == 0 else f"Z+{k}"
        return f"T-{self.payload[0]}"


def t_point(i: int) -> SymbolicPoint:
    """T_i: a single one at position i (i >= 1), all zeros (i = 0), 0^|i| Z (i < 0)."""
    if i == 0:
        return SymbolicPoint.eventually_zero(())
    if i > 0:
        return SymbolicPoint.eventually_zero((0,) * (i - 1) + (1,))
    return SymbolicPoint.zero_padded_z(-i)


_T_PATTERN = re.compile(r"^T(-?\d+)$")
_Z_PATTERN = re.compile(r"^Z(?:\+(\d+))?$")
_EZ_PATTERN = re.compile(r"^EZ:([01]*)$")


def parse_symbolic_point(text: str) -> SymbolicPoint:
    """Parse ``Z``, ``Z+5``, ``T3``, ``T-2`` or ``EZ:0101``."""
    raw = text.strip()
    if match := _T_PATTERN.match(raw):
        return t_point(int(match.group(1)))
    if match := _Z_PATTERN.match(raw):
        return SymbolicPoint.shifted_z(int(match.group(1) or 0))
    if match := _EZ_PATTERN.match(raw):
        return SymbolicPoint.eventually_zero(int(ch) for ch in match.group(1))
    raise MalformedPointError(f"cannot read symbolic point {text!r}")


def first_difference(x: SymbolicPoint, y: SymbolicPoint) -> int | None:
    """1-based index of the first disagreement, None for equal sequences."""
    if x == y:
        return None
    # Distinct forms always denote distinct sequences; past both horizons plus
    # two gaps of Z the sequences are forced apart, so the scan terminates.
    horizon = max(x._support_horizon(), y._support_horizon())
    limit = 2 * horizon + 4 * (math.isqrt(2 * horizon) + 4) + 8
    for n in range(1, limit + 1):
        if x.coordinate(n) != y.coordinate(n):
            return n
    n = limit + 1
    while x.coordinate(n) == y.coordinate(n):
        n += 1
    return n


def symbolic_distance(x: SymbolicPoint, y: SymbolicPoint) -> Fraction:
    """d(x, y) = 2^-N with N the first differing (1-based) coordinate."""
    n = first_difference(x, y)
    return Fraction(0) if n is None else Fraction(1, 2**n)


def cylinder_length(eps: Fraction) -> int:
    """Smallest m with 2^-m <= eps; points sharing m coordinates are eps-close."""
    if eps <= 0:
        raise MalformedPointError("resolution must be positive")
    m = 0
    while Fraction(1, 2**m) > eps:
        m += 1
    return m


@dataclass(frozen=True)
class SymbolicSpace:
    """The full shift on {0, 1} with the 2^-N metric."""

    alphabet: tuple[int, ...] = (0, 1)

    def distance(self, p: SymbolicPoint, q: SymbolicPoint) -> Fraction:
        return symbolic_distance(p, q)

    def nearest(self, points: Sequence[SymbolicPoint]) -> Callable[[SymbolicPoint], Fraction]:
        if not points:
            raise EmptySetError("distance to an empty point set")
        frozen = tuple(points)
        return lambda p: min(symbolic_distance(p, q) for q in frozen)

    def truncate(self, p: SymbolicPoint, m: int) -> SymbolicPoint:
        return SymbolicPoint.eventually_zero(p.prefix(m))

    def epsilon_net(
        self, points: Iterable[SymbolicPoint], eps: Fraction
    ) -> FiniteSet[SymbolicPoint]:
        """Cylinder net: each point is replaced by its truncation to m coordinates."""
        m = cylinder_length(eps)
        return FiniteSet.of(self.truncate(p, m) for p in points)
