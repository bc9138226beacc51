"""Exact periodic points of piecewise-affine tree maps."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from config import settings
from dynamics.errors import BudgetExceededError
from dynamics.space import Segment, TreePoint
from dynamics.systems import PwAffineTreeMap, evaluate, iterate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeriodicOrbit:
    """A periodic orbit; ``interval`` is set when a whole segment is fixed by f^period."""

    base: TreePoint
    period: int
    points: tuple[TreePoint, ...]
    interval: Segment | None = None


@dataclass(frozen=True)
class _Chain:
    """Domain ``[lo, hi]`` of ``edge`` on which f^n is ``t -> a*t + b`` into ``target``."""

    edge: str
    lo: Fraction
    hi: Fraction
    a: Fraction
    b: Fraction
    target: str

    def image(self) -> tuple[Fraction, Fraction]:
        first, second = self.a * self.lo + self.b, self.a * self.hi + self.b
        return min(first, second), max(first, second)


def _extend(f: PwAffineTreeMap, chain: _Chain) -> list[_Chain]:
    low, high = chain.image()
    if low == high:
        q = f.space.point(chain.target, low)
        piece = f.piece_at(q)
        value = piece.image_param(q.t)
        return [_Chain(chain.edge, chain.lo, chain.hi, Fraction(0), value, piece.target)]
    grown: list[_Chain] = []
    for piece in f.pieces_on(chain.target):
        lo, hi = max(piece.lo, low), min(piece.hi, high)
        if lo >= hi:
            continue
        first, second = (lo - chain.b) / chain.a, (hi - chain.b) / chain.a
        grown.append(
            _Chain(
                chain.edge,
                min(first, second),
                max(first, second),
                piece.a * chain.a,
                piece.a * chain.b + piece.b,
                piece.target,
            )
        )
    return grown


def minimal_period(f: PwAffineTreeMap, p: TreePoint, limit: int) -> int | None:
    current = p
    for k in range(1, limit + 1):
        current = evaluate(f, current)
        if current == p:
            return k
    return None


def _candidates(f: PwAffineTreeMap, chain: _Chain) -> set[TreePoint]:
    space = f.space
    found = {space.point(chain.edge, chain.lo), space.point(chain.edge, chain.hi)}
    low, high = chain.image()
    found.add(space.point(chain.target, low))
    found.add(space.point(chain.target, high))
    if chain.target == chain.edge and chain.a != 1:
        t = chain.b / (1 - chain.a)
        if chain.lo <= t <= chain.hi:
            found.add(space.point(chain.edge, t))
    return found


def periodic_points(
    f: PwAffineTreeMap,
    max_period: int,
    chain_cap: int | None = None,
) -> list[PeriodicOrbit]:
    """All periodic orbits of period at most ``max_period``, solved exactly.

    f^n is composed along every chain of pieces; isolated fixed points of each
    affine branch are verified by iteration, and branches equal to the identity
    are reported as intervals of periodic points.
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    cap = chain_cap if chain_cap is not None else settings.CHAIN_CAP
    chains = [
        _Chain(piece.edge, piece.lo, piece.hi, piece.a, piece.b, piece.target)
        for piece in f.pieces
    ]
    orbits: dict[frozenset[TreePoint], PeriodicOrbit] = {}
    known: set[TreePoint] = set()
    intervals: dict[Segment, PeriodicOrbit] = {}
    for n in range(1, max_period + 1):
        if len(chains) > cap:
            logger.warning("Periodic-point search exceeded %s chains at period %s", cap, n)
            raise BudgetExceededError("chains", cap, f"period {n}")
        for chain in chains:
            if chain.target == chain.edge and chain.a == 1 and chain.b == 0:
                segment = Segment(chain.edge, chain.lo, chain.hi)
                middle = f.space.point(chain.edge, (chain.lo + chain.hi) / 2)
                period = minimal_period(f, middle, n) or n
                recorded = intervals.get(segment)
                if recorded is None or recorded.period > period:
                    points = tuple(iterate(f, middle, k) for k in range(period))
                    intervals[segment] = PeriodicOrbit(middle, period, points, segment)
                continue
            for q in _candidates(f, chain):
                if q in known:
                    continue
                if iterate(f, q, n) != q:
                    continue
                period = minimal_period(f, q, n)
                assert period is not None
                points = tuple(iterate(f, q, k) for k in range(period))
                orbit = PeriodicOrbit(min(points), period, tuple(sorted(points)))
                orbits.setdefault(frozenset(points), orbit)
                known.update(points)
        if n < max_period:
            chains = [grown for chain in chains for grown in _extend(f, chain)]
    found = sorted(orbits.values(), key=lambda orbit: (orbit.period, orbit.base))
    found.extend(sorted(intervals.values(), key=lambda orbit: (orbit.period, orbit.base)))
    logger.debug("Found %s periodic orbits up to period %s", len(found), max_period)
    return found


@lru_cache(maxsize=64)
def cached_periodic_points(
    f: PwAffineTreeMap, max_period: int, chain_cap: int
) -> tuple[PeriodicOrbit, ...]:
    return tuple(periodic_points(f, max_period, chain_cap))


def periodic_point_set(f: PwAffineTreeMap, max_period: int, chain_cap: int) -> frozenset[TreePoint]:
    """Isolated periodic points plus the endpoints of periodic intervals."""
    points: set[TreePoint] = set()
    for orbit in cached_periodic_points(f, max_period, chain_cap):
        points.update(orbit.points)
        if orbit.interval is not None:
            points.add(f.space.point(orbit.interval.edge, orbit.interval.lo))
            points.add(f.space.point(orbit.interval.edge, orbit.interval.hi))
    return frozenset(points)
