"""Piecewise-affine tree maps and the symbolic shift system.

A map is stored as canonical ``Piece`` values: on ``[lo, hi]`` of ``edge`` the
point with parameter ``t`` goes to parameter ``a*t + b`` of ``target``. Users
usually describe a map with ``PathRule`` values instead, where the image runs
along a walk of edges measured in edge units; construction splits those into
pieces and validates continuity, totality and that images stay on the tree.
"""

from __future__ import annotations

import bisect
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from typing import Any, Protocol, TypeVar

from config import settings
from dynamics.errors import BudgetExceededError, MalformedMapError, MalformedPointError
from dynamics.space import ONE, ZERO, Segment, SubtreeSet, TreePoint, TreeSpace
from dynamics.symbolic import SymbolicKind, SymbolicPoint, SymbolicSpace

logger = logging.getLogger(__name__)

P = TypeVar("P", bound=Any)


class Outcome(StrEnum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one query, with the evidence that decided it."""

    query: str
    subject: object
    outcome: Outcome
    witness: Mapping[str, object] = field(default_factory=dict)
    parameters: Mapping[str, object] = field(default_factory=dict)
    budget_relative: bool = False

    @property
    def passed(self) -> bool:
        return self.outcome is Outcome.PASS


class DynamicalSystem(Protocol[P]):
    @property
    def space(self) -> Any: ...

    def step(self, p: P) -> P: ...


# -- piecewise-affine maps ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class Piece:
    edge: str
    lo: Fraction
    hi: Fraction
    target: str
    a: Fraction
    b: Fraction

    def image_param(self, t: Fraction) -> Fraction:
        return self.a * t + self.b

    def image_span(self) -> tuple[Fraction, Fraction]:
        first, second = self.image_param(self.lo), self.image_param(self.hi)
        return min(first, second), max(first, second)

    def domain(self) -> Segment:
        return Segment(self.edge, self.lo, self.hi)


@dataclass(frozen=True)
class PathRule:
    """``s`` in ``[lo, hi]`` of ``edge`` maps to position ``a*s + b`` along ``path``.

    A path is a walk of edge ids; ``~`` reverses an edge. Position ``k + u``
    (``0 <= u <= 1``) is the point at fraction ``u`` through the k-th step.
    """

    edge: str
    lo: Fraction
    hi: Fraction
    path: tuple[str, ...]
    a: Fraction
    b: Fraction


def _step_edge(step: str) -> tuple[str, bool]:
    return (step[1:], True) if step.startswith("~") else (step, False)


@dataclass(frozen=True)
class PreimageComponent:
    """Connected piece of ``f^-depth`` of a point; ``parent`` indexes the level above."""

    region: SubtreeSet
    depth: int
    parent: int | None = None


@dataclass(frozen=True)
class BackwardTree:
    root: TreePoint
    levels: tuple[tuple[PreimageComponent, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> tuple[PreimageComponent, ...]:
        return self.levels[n]

    def segments(self) -> tuple[Segment, ...]:
        return tuple(seg for level in self.levels for comp in level for seg in comp.region)


@dataclass(frozen=True)
class CoreSpace:
    region: SubtreeSet
    iterations: int
    stabilized: bool


@dataclass(frozen=True)
class PwAffineTreeMap:
    """Continuous self-map of a ``TreeSpace``, affine on each piece."""

    space: TreeSpace
    pieces: tuple[Piece, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        self._validate()

    @classmethod
    def from_pieces(
        cls, space: TreeSpace, pieces: Iterable[Piece], name: str = ""
    ) -> PwAffineTreeMap:
        return cls(space, _canonical_pieces(space, pieces), name)

    @classmethod
    def from_rules(
        cls, space: TreeSpace, rules: Iterable[PathRule], name: str = ""
    ) -> PwAffineTreeMap:
        pieces: list[Piece] = []
        for rule in rules:
            pieces.extend(_split_rule(space, rule))
        return cls.from_pieces(space, pieces, name)

    # -- construction checks ----------------------------------------------------

    def _validate(self) -> None:
        space = self.space
        for piece in self.pieces:
            if piece.edge not in space.edge_order or piece.target not in space.edge_order:
                raise MalformedMapError(
                    f"piece {piece} references an unknown edge", edge=piece.edge, at=piece.lo
                )
            if not ZERO <= piece.lo < piece.hi <= ONE:
                raise MalformedMapError(
                    f"piece {piece} has an empty or out-of-range domain",
                    edge=piece.edge,
                    at=piece.lo,
                )
            low, high = piece.image_span()
            if low < ZERO or high > ONE:
                raise MalformedMapError(
                    f"piece on {piece.edge} maps outside edge {piece.target}",
                    edge=piece.edge,
                    at=piece.lo,
                )
        for edge_id in space.edge_order:
            pieces = self._by_edge.get(edge_id, ())
            if not pieces or pieces[0].lo != ZERO or pieces[-1].hi != ONE:
                raise MalformedMapError(f"edge {edge_id!r} is not fully covered", edge=edge_id)
            for left, right in zip(pieces, pieces[1:], strict=False):
                if left.hi != right.lo:
                    raise MalformedMapError(
                        f"edge {edge_id!r} pieces overlap or leave a gap at {left.hi}",
                        edge=edge_id,
                        at=right.lo,
                    )
                if self._at(left, left.hi) != self._at(right, right.lo):
                    raise MalformedMapError(
                        f"map is discontinuous on {edge_id!r} at {left.hi}",
                        edge=edge_id,
                        at=right.lo,
                    )
        for vertex in space.vertices:
            images = set()
            for edge_id in space.incident(vertex):
                edge = space.edge(edge_id)
                pieces = self._by_edge[edge_id]
                if edge.tail == vertex:
                    images.add(self._at(pieces[0], ZERO))
                if edge.head == vertex:
                    images.add(self._at(pieces[-1], ONE))
            if len(images) != 1:
                raise MalformedMapError(f"map is discontinuous at vertex {vertex!r}", vertex=vertex)

    def _at(self, piece: Piece, t: Fraction) -> TreePoint:
        return self.space.point(piece.target, piece.image_param(t))

    @cached_property
    def _by_edge(self) -> dict[str, tuple[Piece, ...]]:
        table: dict[str, list[Piece]] = {}
        for piece in self.pieces:
            table.setdefault(piece.edge, []).append(piece)
        return {edge_id: tuple(sorted(items)) for edge_id, items in table.items()}

    @cached_property
    def _starts(self) -> dict[str, list[Fraction]]:
        return {edge_id: [p.lo for p in pieces] for edge_id, pieces in self._by_edge.items()}

    # -- access -----------------------------------------------------------------

    def pieces_on(self, edge_id: str) -> tuple[Piece, ...]:
        return self._by_edge[edge_id]

    def piece_at(self, p: TreePoint) -> Piece:
        """Piece of ``p``'s normalized edge containing it (the left one at breakpoints)."""
        pieces = self._by_edge[p.edge]
        index = max(0, bisect.bisect_left(self._starts[p.edge], p.t) - 1)
        if index + 1 < len(pieces) and pieces[index].hi < p.t:
            index += 1
        return pieces[index]

    def breakpoints(self) -> tuple[TreePoint, ...]:
        found = {
            self.space.point(piece.edge, t) for piece in self.pieces for t in (piece.lo, piece.hi)
        }
        return tuple(sorted(found))

    def rules(self) -> tuple[PathRule, ...]:
        return tuple(
            PathRule(piece.edge, piece.lo, piece.hi, (piece.target,), piece.a, piece.b)
            for piece in self.pieces
        )

    def step(self, p: TreePoint) -> TreePoint:
        return evaluate(self, p)


def _canonical_pieces(space: TreeSpace, pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    normalized: list[Piece] = []
    for piece in pieces:
        if piece.a == 0 and piece.b in (ZERO, ONE) and piece.target in space.edge_order:
            rep = space.point(piece.target, piece.b)
            piece = Piece(piece.edge, piece.lo, piece.hi, rep.edge, ZERO, rep.t)
        normalized.append(piece)
    merged: list[Piece] = []
    for piece in sorted(normalized):
        if merged:
            last = merged[-1]
            if (last.edge, last.target, last.a, last.b) == (
                piece.edge,
                piece.target,
                piece.a,
                piece.b,
            ) and last.hi == piece.lo:
                merged[-1] = Piece(last.edge, last.lo, piece.hi, last.target, last.a, last.b)
                continue
        merged.append(piece)
    return tuple(merged)


def _split_rule(space: TreeSpace, rule: PathRule) -> list[Piece]:
    if not rule.path:
        raise MalformedMapError(
            f"rule on {rule.edge!r} has an empty target path", edge=rule.edge, at=rule.lo
        )
    steps = [_step_edge(step) for step in rule.path]
    for edge_id, _ in steps:
        if edge_id not in space.edge_order:
            raise MalformedMapError(
                f"target path uses unknown edge {edge_id!r}", edge=rule.edge, at=rule.lo
            )
    for (first, rev_first), (second, rev_second) in zip(steps, steps[1:], strict=False):
        first_edge, second_edge = space.edge(first), space.edge(second)
        leave = first_edge.tail if rev_first else first_edge.head
        enter = second_edge.head if rev_second else second_edge.tail
        if leave != enter:
            raise MalformedMapError(
                f"target path breaks between {first!r} and {second!r}",
                edge=rule.edge,
                at=rule.lo,
            )
    lo, hi = Fraction(rule.lo), Fraction(rule.hi)
    a, b = Fraction(rule.a), Fraction(rule.b)
    ends = (a * lo + b, a * hi + b)
    if min(ends) < 0 or max(ends) > len(steps):
        raise MalformedMapError(
            f"rule on {rule.edge!r} runs off its target path", edge=rule.edge, at=rule.lo
        )
    cuts = {lo, hi}
    if a != 0:
        for k in range(math.ceil(min(ends)), math.floor(max(ends)) + 1):
            s = (k - b) / a
            if lo < s < hi:
                cuts.add(s)
    ordered = sorted(cuts)
    pieces: list[Piece] = []
    for s0, s1 in zip(ordered, ordered[1:], strict=False):
        middle = a * (s0 + s1) / 2 + b
        k = min(math.floor(middle), len(steps) - 1)
        edge_id, reverse = steps[k]
        if reverse:
            pieces.append(Piece(rule.edge, s0, s1, edge_id, -a, 1 - b + k))
        else:
            pieces.append(Piece(rule.edge, s0, s1, edge_id, a, b - k))
    return pieces


# -- operations ---------------------------------------------------------------------


def evaluate(f: PwAffineTreeMap, p: TreePoint) -> TreePoint:
    """Exact image of ``p``."""
    q = f.space.normalize(p)
    piece = f.piece_at(q)
    return f.space.point(piece.target, piece.image_param(q.t))


def iterate(f: DynamicalSystem[P], p: P, n: int) -> P:
    """``f^n(p)``; ``n = 0`` returns ``p``."""
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    current = f.space.normalize(p) if isinstance(f, PwAffineTreeMap) else p
    for _ in range(n):
        current = f.step(current)
    return current


def orbit(f: DynamicalSystem[P], p: P, length: int) -> list[P]:
    """``[p, f(p), ..., f^(length-1)(p)]``."""
    points: list[P] = []
    current = f.space.normalize(p) if isinstance(f, PwAffineTreeMap) else p
    for _ in range(length):
        points.append(current)
        current = f.step(current)
    return points


def pull_back(f: PwAffineTreeMap, piece: Piece, lo: Fraction, hi: Fraction) -> Segment | None:
    """Part of ``piece``'s domain whose image lies in ``[lo, hi]`` of its target."""
    low, high = piece.image_span()
    low, high = max(low, lo), min(high, hi)
    if low > high:
        return None
    if piece.a == 0:
        return piece.domain()
    first, second = (low - piece.b) / piece.a, (high - piece.b) / piece.a
    return Segment(piece.edge, min(first, second), max(first, second))


def _target_spans(
    space: TreeSpace, region: Iterable[Segment], target: str
) -> list[tuple[Fraction, Fraction]]:
    edge = space.edge(target)
    spans: list[tuple[Fraction, Fraction]] = []
    for seg in region:
        if seg.edge == target:
            spans.append((seg.lo, seg.hi))
            continue
        for vertex, t in ((edge.tail, ZERO), (edge.head, ONE)):
            if space.segment_contains(seg, space.vertex_point(vertex)):
                spans.append((t, t))
    return spans


def preimage_segments(f: PwAffineTreeMap, region: Iterable[Segment]) -> list[Segment]:
    """Raw (uncanonicalized) pieces of ``f^-1(region)``."""
    found: list[Segment] = []
    segments = tuple(region)
    for piece in f.pieces:
        for lo, hi in _target_spans(f.space, segments, piece.target):
            pulled = pull_back(f, piece, lo, hi)
            if pulled is not None:
                found.append(pulled)
    return found


def preimage_of_set(f: PwAffineTreeMap, region: Iterable[Segment]) -> list[SubtreeSet]:
    """Connected components of ``f^-1(region)``."""
    return f.space.components(preimage_segments(f, region))


def preimage(f: PwAffineTreeMap, p: TreePoint) -> list[PreimageComponent]:
    """Exact ``f^-1(p)`` as maximal connected components."""
    q = f.space.normalize(p)
    parts = preimage_of_set(f, (Segment(q.edge, q.t, q.t),))
    return [PreimageComponent(part, 1) for part in parts]


def backward_tree(
    f: PwAffineTreeMap,
    p: TreePoint,
    depth: int,
    component_cap: int | None = None,
) -> BackwardTree:
    """All preimage components of ``p`` up to ``depth`` with parent links."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    cap = component_cap if component_cap is not None else settings.COMPONENT_CAP
    root = f.space.normalize(p)
    levels: list[tuple[PreimageComponent, ...]] = [
        (PreimageComponent(SubtreeSet((Segment(root.edge, root.t, root.t),)), 0),)
    ]
    for n in range(1, depth + 1):
        level: list[PreimageComponent] = []
        for index, parent in enumerate(levels[-1]):
            for part in preimage_of_set(f, parent.region):
                level.append(PreimageComponent(part, n, index))
            if len(level) > cap:
                logger.warning(
                    "Backward tree of %s exceeded %s components at level %s", root, cap, n
                )
                raise BudgetExceededError("components", cap, f"level {n}")
        levels.append(tuple(level))
        if not level:
            logger.debug("Backward tree of %s dies out at level %s", root, n)
    return BackwardTree(root, tuple(levels))


def image_of_segment(f: PwAffineTreeMap, segment: Segment) -> SubtreeSet:
    """Exact image of one segment as a union of closed segments."""
    space = f.space
    if segment.degenerate:
        q = evaluate(f, space.point(segment.edge, segment.lo))
        return SubtreeSet((Segment(q.edge, q.t, q.t),))
    images: list[Segment] = []
    for piece in f.pieces_on(segment.edge):
        lo, hi = max(piece.lo, segment.lo), min(piece.hi, segment.hi)
        if lo > hi:
            continue
        first, second = piece.image_param(lo), piece.image_param(hi)
        images.append(Segment(piece.target, min(first, second), max(first, second)))
    return space.subtree(images)


def image_of_segments(f: PwAffineTreeMap, region: Iterable[Segment]) -> SubtreeSet:
    images: list[Segment] = []
    for segment in region:
        images.extend(image_of_segment(f, segment))
    return f.space.subtree(images)


def check_monotone(f: PwAffineTreeMap) -> Verdict:
    """Decide whether every point preimage is connected.

    Component counts only change at images of breakpoints, so each edge is
    checked at those critical parameters and once between consecutive ones.
    """
    space = f.space
    critical = {evaluate(f, point) for point in f.breakpoints()}
    checked = 0
    for edge_id in space.edge_order:
        params = {ZERO, ONE}
        for point in critical:
            t = space.param_on(point, edge_id)
            if t is not None:
                params.add(t)
        ordered = sorted(params)
        midpoints = [(left + right) / 2 for left, right in zip(ordered, ordered[1:], strict=False)]
        for t in (*midpoints, *ordered):
            q = space.point(edge_id, t)
            checked += 1
            parts = preimage(f, q)
            if len(parts) >= 2:
                return Verdict(
                    "monotone",
                    f.name or "map",
                    Outcome.FAIL,
                    witness={"point": q, "components": [part.region for part in parts]},
                )
    return Verdict("monotone", f.name or "map", Outcome.PASS, witness={"checked": checked})


def core_space(f: PwAffineTreeMap, n: int) -> CoreSpace:
    """``f^n(X)`` by iterated edge images, flagged when ``f^n(X) = f^(n+1)(X)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    current = f.space.whole()
    for done in range(n):
        following = image_of_segments(f, current)
        if following == current:
            logger.debug("Core space stabilized after %s iterations", done)
            return CoreSpace(current, n, True)
        current = following
    return CoreSpace(current, n, image_of_segments(f, current) == current)


# -- symbolic shift -----------------------------------------------------------------


def _in_shift_carrier(x: SymbolicPoint) -> bool:
    if x.kind is SymbolicKind.EVENTUALLY_ZERO:
        return x.payload.count(1) <= 1
    return True


@dataclass(frozen=True)
class ShiftSystem:
    """The shift restricted to the orbit of Z, the points T_i and 0^i Z."""

    space: SymbolicSpace = field(default_factory=SymbolicSpace)
    name: str = "shift"

    def contains(self, x: SymbolicPoint) -> bool:
        return _in_shift_carrier(x)

    def step(self, x: SymbolicPoint) -> SymbolicPoint:
        return shift_evaluate(self, x)


def shift_evaluate(s: ShiftSystem, x: SymbolicPoint) -> SymbolicPoint:
    """sigma(x), staying within the three exact forms."""
    if not s.contains(x):
        raise MalformedPointError(f"{x} is not in the shift carrier")
    return x.shift()


def parse_tree_point(space: TreeSpace, text: str) -> TreePoint:
    """Read ``EDGE:P/Q``, a vertex id, or a bare rational on a single-edge space."""
    raw = text.strip()
    if ":" in raw:
        edge_id, _, value = raw.rpartition(":")
        try:
            t = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise MalformedPointError(f"bad parameter in point {text!r}") from None
        return space.point(edge_id, t)
    if raw in space.vertices:
        return space.vertex_point(raw)
    if len(space.edges) == 1:
        try:
            return space.point(space.edges[0].id, Fraction(raw))
        except (ValueError, ZeroDivisionError):
            pass
    raise MalformedPointError(f"cannot read point {text!r}")


def format_tree_point(space: TreeSpace, p: TreePoint) -> str:
    vertex = space.vertex_of(p)
    return vertex if vertex is not None else str(p)
