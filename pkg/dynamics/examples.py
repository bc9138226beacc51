"""Builders for the worked example systems and randomized monotone fixtures."""

from __future__ import annotations

import logging
import random
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

from config import settings
from dynamics.errors import MalformedMapError
from dynamics.space import ONE, ZERO, TreeSpace, star_space
from dynamics.symbolic import SymbolicPoint, k_formula, t_point
from dynamics.systems import Piece, PwAffineTreeMap, ShiftSystem

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
CENTER = "z0"

__all__ = [
    "EXAMPLES",
    "build_collapsing_star",
    "build_dendroid_example",
    "build_e616_star",
    "build_example",
    "build_full_tent",
    "build_infinite_star",
    "build_shift_example",
    "build_star_map",
    "build_tent_tail",
    "default_epsilon",
    "dendroid_epsilon",
    "k_formula",
    "random_monotone_star",
]


def beam_id(n: int, k: int) -> str:
    return f"I{n}.{k}"


def endpoint_id(n: int, k: int) -> str:
    return f"z{n}.{k}"


def _tent_tail_pieces(edge: str, target: str) -> list[Piece]:
    """max(0, 2t - 1) from ``edge`` onto ``target``."""
    return [
        Piece(edge, ZERO, HALF, target, ZERO, ZERO),
        Piece(edge, HALF, ONE, target, Fraction(2), Fraction(-1)),
    ]


def _star_pieces(n: int) -> list[Piece]:
    pieces: list[Piece] = []
    for k in range(n):
        pieces.extend(_tent_tail_pieces(beam_id(n, k), beam_id(n, (k + 1) % n)))
    return pieces


def build_star_map(n: int) -> PwAffineTreeMap:
    """Tent-tail on every unit beam of the n-star, then rotation k -> k+1 mod n."""
    if n < 1:
        raise MalformedMapError("a star needs at least one beam")
    space = star_space([(beam_id(n, k), endpoint_id(n, k), ONE) for k in range(n)], CENTER)
    return PwAffineTreeMap.from_pieces(space, _star_pieces(n), f"star:{n}")


def build_tent_tail() -> PwAffineTreeMap:
    """t -> max(0, 2t - 1) on one unit edge."""
    star = build_star_map(1)
    return PwAffineTreeMap(star.space, star.pieces, "tent-tail")


def build_infinite_star(n_max: int) -> PwAffineTreeMap:
    """Stars S_1..S_n_max glued at z0; beams of S_n have length 1/n and carry f_n."""
    if n_max < 1:
        raise MalformedMapError("n_max must be at least 1")
    beams = [
        (beam_id(n, k), endpoint_id(n, k), Fraction(1, n))
        for n in range(1, n_max + 1)
        for k in range(n)
    ]
    pieces = [piece for n in range(1, n_max + 1) for piece in _star_pieces(n)]
    return PwAffineTreeMap.from_pieces(star_space(beams, CENTER), pieces, f"inf-star:{n_max}")


def build_e616_star(n_max: int) -> PwAffineTreeMap:
    """Beams I1..I_n_max of length 1/n, each carrying tent-tail without rotation."""
    if n_max < 1:
        raise MalformedMapError("n_max must be at least 1")
    beams = [(f"I{n}", f"z{n}", Fraction(1, n)) for n in range(1, n_max + 1)]
    pieces = [piece for n in range(1, n_max + 1) for piece in _tent_tail_pieces(f"I{n}", f"I{n}")]
    return PwAffineTreeMap.from_pieces(star_space(beams, CENTER), pieces, f"e616:{n_max}")


def build_full_tent() -> PwAffineTreeMap:
    """t -> 1 - |2t - 1|: continuous but not monotone."""
    space = star_space([("I", "z1", ONE)], CENTER)
    pieces = [
        Piece("I", ZERO, HALF, "I", Fraction(2), ZERO),
        Piece("I", HALF, ONE, "I", Fraction(-2), Fraction(2)),
    ]
    return PwAffineTreeMap.from_pieces(space, pieces, "full-tent")


def build_collapsing_star() -> PwAffineTreeMap:
    """Two beams: A contracts by half towards z0, B collapses onto z0."""
    space = star_space([("A", "a", ONE), ("B", "b", ONE)], CENTER)
    pieces = [
        Piece("A", ZERO, ONE, "A", HALF, ZERO),
        Piece("B", ZERO, ONE, "B", ZERO, ZERO),
    ]
    return PwAffineTreeMap.from_pieces(space, pieces, "collapsing-star")


def build_shift_example() -> ShiftSystem:
    """The shift on the orbit of Z, the points T_i and the points 0^i Z."""
    return ShiftSystem()


def random_monotone_star(
    beams: int, grid: int = 4, seed: int | None = None
) -> PwAffineTreeMap:
    """Seeded monotone, onto star map with integer slopes on a 1/grid subdivision.

    Each beam map is nondecreasing with slopes in {0, 1, 2}, fixes z0 and sends
    the endpoint to an endpoint; beams are then permuted at random.
    """
    if beams < 1 or grid < 1:
        raise MalformedMapError("random stars need at least one beam and one cell")
    rng = random.Random(settings.DEFAULT_SEED if seed is None else seed)
    order = list(range(beams))
    rng.shuffle(order)
    space = star_space(
        [(f"B{k}", f"e{k}", ONE) for k in range(beams)], CENTER
    )
    pieces: list[Piece] = []
    for k in range(beams):
        slopes = [1] * grid
        for _ in range(2 * grid):
            donor, receiver = rng.randrange(grid), rng.randrange(grid)
            if slopes[donor] > 0 and slopes[receiver] < 2 and donor != receiver:
                slopes[donor] -= 1
                slopes[receiver] += 1
        level = ZERO
        for cell, slope in enumerate(slopes):
            lo, hi = Fraction(cell, grid), Fraction(cell + 1, grid)
            a = Fraction(slope)
            pieces.append(Piece(f"B{k}", lo, hi, f"B{order[k]}", a, level - a * lo))
            level += Fraction(slope, grid)
    name = f"random-star:{beams},{grid},{seed if seed is not None else settings.DEFAULT_SEED}"
    logger.debug("Built %s with permutation %s", name, order)
    return PwAffineTreeMap.from_pieces(space, pieces, name)


# -- dendroid -----------------------------------------------------------------------


def cantor_coordinate(x: SymbolicPoint, precision: int) -> Fraction:
    """sum of 2 * x_n * 3^-n over the first ``precision`` coordinates."""
    return sum(
        (Fraction(2, 3**n) for n in range(1, precision + 1) if x.coordinate(n)), Fraction(0)
    )


@dataclass(frozen=True)
class _Landmark:
    name: str
    point: SymbolicPoint


def _dendroid_landmarks(m_beams: int, k_arcs: int) -> list[_Landmark]:
    marks = [_Landmark(f"T{i}", t_point(i)) for i in range(1, m_beams + 1)]
    marks += [_Landmark(f"T-{i}", t_point(-i)) for i in range(1, m_beams + 1)]
    marks += [_Landmark(f"J{k}", SymbolicPoint.shifted_z(k)) for k in range(k_arcs + 1)]
    return marks


def _dendroid_successor(name: str, m_beams: int, k_arcs: int) -> str | None:
    """Landmark whose arc receives ``name``'s arc; None collapses onto T0."""
    if name.startswith("T-"):
        i = int(name[2:])
        return "J0" if i == 1 else f"T-{i - 1}"
    if name.startswith("T"):
        i = int(name[1:])
        return None if i == 1 else f"T{i - 1}"
    k = int(name[1:])
    return None if k == k_arcs else f"J{k + 1}"


def build_dendroid_example(m_beams: int, k_arcs: int) -> PwAffineTreeMap:
    """Planar truncation of the shift dendroid.

    T0 sits at (0, 1); every landmark x (T_i, T_-i and the orbit points J_k of
    Z) ends at (a, 1) with a the Cantor coordinate of x, reached through an apex
    at (a, 1 - a^2). Distances are planar L-infinity, so arcs J_k whose
    landmarks approach T_i in the sequence metric also approach it in the plane.
    Beams shift down, I_1 and the last arc J_K collapse onto T0, I_-1 feeds J_0.
    """
    if m_beams < 2 or k_arcs < 1:
        raise MalformedMapError("dendroid needs at least 2 beams and 1 arc")
    precision = 2 * (k_arcs + m_beams) + 64
    points: dict[str, tuple[Fraction, Fraction]] = {"T0": (ZERO, ONE)}
    edges: list[tuple[str, str, str]] = []
    marks = _dendroid_landmarks(m_beams, k_arcs)
    for mark in marks:
        a = cantor_coordinate(mark.point, precision)
        apex = f"{mark.name}.apex"
        points[apex] = (a, ONE - a * a)
        points[mark.name] = (a, ONE)
        edges.append((f"{mark.name}.in", "T0", apex))
        edges.append((f"{mark.name}.out", apex, mark.name))
    space = TreeSpace.embedded(points, edges, "T0")
    pieces: list[Piece] = []
    for mark in marks:
        successor = _dendroid_successor(mark.name, m_beams, k_arcs)
        for part in ("in", "out"):
            edge = f"{mark.name}.{part}"
            if successor is None:
                pieces.append(Piece(edge, ZERO, ONE, f"{marks[0].name}.in", ZERO, ZERO))
            else:
                pieces.append(Piece(edge, ZERO, ONE, f"{successor}.{part}", ONE, ZERO))
    return PwAffineTreeMap.from_pieces(space, pieces, f"dendroid:{m_beams},{k_arcs}")


# -- registry -----------------------------------------------------------------------


def _ints(raw: str, count: int) -> list[int]:
    values = [int(item) for item in raw.split(",")] if raw else []
    if len(values) != count:
        raise ValueError(f"expected {count} integer parameter(s), got {raw!r}")
    return values


@dataclass(frozen=True)
class ExampleEntry:
    summary: str
    usage: str
    build: Callable[[str], PwAffineTreeMap | ShiftSystem]


EXAMPLES: dict[str, ExampleEntry] = {
    "tent-tail": ExampleEntry(
        "max(0, 2t - 1) on the unit interval", "tent-tail", lambda raw: build_tent_tail()
    ),
    "star": ExampleEntry(
        "beamwise tent-tail on the N-star followed by beam rotation",
        "star:N",
        lambda raw: build_star_map(*_ints(raw, 1)),
    ),
    "inf-star": ExampleEntry(
        "stars S_1..S_N glued at z0 with beam length 1/n",
        "inf-star:N",
        lambda raw: build_infinite_star(*_ints(raw, 1)),
    ),
    "e616": ExampleEntry(
        "beams of length 1/n, each with tent-tail and no rotation",
        "e616:N",
        lambda raw: build_e616_star(*_ints(raw, 1)),
    ),
    "shift": ExampleEntry(
        "shift on orbit(Z), T_i and 0^i Z", "shift", lambda raw: build_shift_example()
    ),
    "dendroid": ExampleEntry(
        "planar dendroid truncation with M beams per side and arcs J_0..J_K",
        "dendroid:M,K",
        lambda raw: build_dendroid_example(*_ints(raw, 2)),
    ),
    "full-tent": ExampleEntry(
        "1 - |2t - 1| (not monotone)", "full-tent", lambda raw: build_full_tent()
    ),
    "collapsing-star": ExampleEntry(
        "two-beam star whose image shrinks every step",
        "collapsing-star",
        lambda raw: build_collapsing_star(),
    ),
    "random-star": ExampleEntry(
        "seeded random monotone star map",
        "random-star:BEAMS,GRID,SEED",
        lambda raw: random_monotone_star(*_ints(raw, 3)),
    ),
}


def build_example(text: str) -> PwAffineTreeMap | ShiftSystem:
    """Build an example from ``name`` or ``name:params``."""
    name, _, raw = text.strip().partition(":")
    entry = EXAMPLES.get(name)
    if entry is None:
        raise ValueError(f"unknown example {name!r}; known: {', '.join(sorted(EXAMPLES))}")
    return entry.build(raw)


def dendroid_epsilon(k_arcs: int) -> Fraction:
    """Smallest power 2^-e not below 3^-n, the radius at which T1 is nonwandering.

    n is the largest index with k_n - 1 <= K. The arcs J_(k_(n-1) - 1) and
    J_(k_n - 1) agree with T1 on n coordinates, so both lie within 3^-n of it,
    and the first is carried onto the second. Any ball of radius at least 3^-n
    around T1 therefore returns.
    """
    n = 0
    while k_formula(n + 1) - 1 <= k_arcs:
        n += 1
    if n < 3:
        raise MalformedMapError("the dendroid needs arcs up to J_5 for a return near T1")
    return Fraction(1, 2 ** ((3**n).bit_length() - 1))


def default_epsilon(system: PwAffineTreeMap | ShiftSystem) -> Fraction | None:
    """Resolution an example is meant to be examined at, when it differs from the default."""
    family, _, raw = system.name.partition(":")
    if family == "dendroid":
        return dendroid_epsilon(_ints(raw, 2)[1])
    return None
