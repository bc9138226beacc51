"""Finite metric trees: exact points, segments, balls, Hausdorff distance and Mesh.

All coordinates are ``Fraction`` values. A point is an edge id plus a parameter
``t`` in ``[0, 1]`` measured from the edge's tail vertex; points sitting on a
vertex are normalized onto the vertex's canonical edge so equality is plain
dataclass equality.
"""

from __future__ import annotations

import bisect
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Generic, Protocol, TypeVar

import networkx as nx

from dynamics.errors import EmptySetError, MalformedMapError, MalformedPointError

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True, order=True)
class TreePoint:
    """A location on an edge; ``t`` runs from the tail (0) to the head (1)."""

    edge: str
    t: Fraction

    def __str__(self) -> str:
        return f"{self.edge}:{self.t}"


@dataclass(frozen=True, order=True)
class Segment:
    """Closed parameter interval ``[lo, hi]`` on one edge."""

    edge: str
    lo: Fraction
    hi: Fraction

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains_param(self, t: Fraction) -> bool:
        return self.lo <= t <= self.hi


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: Fraction


@dataclass(frozen=True)
class SubtreeSet:
    """Canonical finite union of closed segments (build with ``TreeSpace.subtree``)."""

    segments: tuple[Segment, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.segments)

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)


P = TypeVar("P", bound=Any)


@dataclass(frozen=True)
class FiniteSet(Generic[P]):
    """Deduplicated point set in canonical (sorted) order."""

    points: tuple[P, ...] = ()

    @classmethod
    def of(cls, points: Iterable[P]) -> FiniteSet[P]:
        return cls(tuple(sorted(set(points))))

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __bool__(self) -> bool:
        return bool(self.points)

    def __contains__(self, item: object) -> bool:
        return item in self.points


class MetricSpace(Protocol[P]):
    """What limit and classification code needs from an ambient space."""

    def distance(self, p: P, q: P) -> Fraction: ...

    def nearest(self, points: Sequence[P]) -> Callable[[P], Fraction]: ...

    def epsilon_net(self, points: Iterable[P], eps: Fraction) -> FiniteSet[P]: ...


@dataclass(frozen=True)
class Ball:
    """Closed metric ball as segments plus its finite boundary."""

    region: SubtreeSet
    boundary: FiniteSet[TreePoint]


@dataclass(frozen=True)
class TreeSpace:
    """A finite tree with the path metric, or the planar L-infinity metric when
    every vertex carries coordinates (edges are then straight segments)."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    root: str
    coordinates: tuple[tuple[str, Fraction, Fraction], ...] = field(default=())

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise MalformedMapError("duplicate vertex id")
        if len({edge.id for edge in self.edges}) != len(self.edges):
            raise MalformedMapError("duplicate edge id")
        if self.root not in self.vertices:
            raise MalformedMapError(f"unknown root vertex {self.root!r}")
        known = set(self.vertices)
        for edge in self.edges:
            if edge.tail not in known or edge.head not in known:
                raise MalformedMapError(
                    f"edge {edge.id!r} references an unknown vertex", edge=edge.id
                )
            if edge.length <= 0:
                raise MalformedMapError(
                    f"edge {edge.id!r} must have positive length", edge=edge.id
                )
        if not nx.is_tree(self.graph):
            raise MalformedMapError("edges must form a connected acyclic graph")
        if self.coordinates:
            coords = self._coords
            if set(coords) != known:
                raise MalformedMapError("planar coordinates must cover every vertex")
            for edge in self.edges:
                (x0, y0), (x1, y1) = coords[edge.tail], coords[edge.head]
                if max(abs(x1 - x0), abs(y1 - y0)) != edge.length:
                    raise MalformedMapError(
                        f"edge {edge.id!r} length must equal its planar L-infinity length"
                    )

    @classmethod
    def embedded(
        cls,
        points: dict[str, tuple[Fraction, Fraction]],
        edges: Sequence[tuple[str, str, str]],
        root: str,
    ) -> TreeSpace:
        """Build a planar tree; edge lengths follow from the coordinates."""
        built = []
        for edge_id, tail, head in edges:
            (x0, y0), (x1, y1) = points[tail], points[head]
            built.append(Edge(edge_id, tail, head, max(abs(x1 - x0), abs(y1 - y0))))
        coords = tuple(sorted((name, x, y) for name, (x, y) in points.items()))
        return cls(tuple(points), tuple(built), root, coords)

    @property
    def is_embedded(self) -> bool:
        return bool(self.coordinates)

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        for edge in self.edges:
            graph.add_edge(edge.tail, edge.head, id=edge.id, length=edge.length)
        return graph

    @cached_property
    def _edges(self) -> dict[str, Edge]:
        return {edge.id: edge for edge in self.edges}

    @cached_property
    def _coords(self) -> dict[str, tuple[Fraction, Fraction]]:
        return {name: (x, y) for name, x, y in self.coordinates}

    @cached_property
    def _incident(self) -> dict[str, tuple[str, ...]]:
        table: dict[str, list[str]] = {vertex: [] for vertex in self.vertices}
        for edge in self.edges:
            table[edge.tail].append(edge.id)
            table[edge.head].append(edge.id)
        return {vertex: tuple(sorted(ids)) for vertex, ids in table.items()}

    @cached_property
    def _vertex_points(self) -> dict[str, TreePoint]:
        reps: dict[str, TreePoint] = {}
        for vertex, incident in self._incident.items():
            if not incident:
                raise MalformedMapError(f"vertex {vertex!r} has no incident edge", vertex=vertex)
            edge = self._edges[incident[0]]
            reps[vertex] = TreePoint(edge.id, ZERO if edge.tail == vertex else ONE)
        return reps

    @cached_property
    def _vertex_distances(self) -> dict[str, dict[str, Fraction]]:
        return {
            source: dict(lengths)
            for source, lengths in nx.all_pairs_dijkstra_path_length(self.graph, weight="length")
        }

    @cached_property
    def edge_order(self) -> tuple[str, ...]:
        return tuple(sorted(self._edges))

    @cached_property
    def shortest_edge(self) -> Fraction:
        return min(edge.length for edge in self.edges)

    @cached_property
    def diameter(self) -> Fraction:
        if self.is_embedded:
            return max(
                (self._vertex_gap(u, v) for u in self.vertices for v in self.vertices),
                default=ZERO,
            )
        return max(
            (d for row in self._vertex_distances.values() for d in row.values()),
            default=ZERO,
        )

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise MalformedPointError(f"unknown edge id {edge_id!r}") from None

    def incident(self, vertex: str) -> tuple[str, ...]:
        return self._incident[vertex]

    # -- points -----------------------------------------------------------------

    def point(self, edge_id: str, t: Fraction | int | str) -> TreePoint:
        """Return the normalized point at parameter ``t`` of ``edge_id``."""
        edge = self.edge(edge_id)
        value = Fraction(t)
        if not ZERO <= value <= ONE:
            raise MalformedPointError(f"parameter {value} out of [0,1] on edge {edge_id!r}")
        if value == ZERO:
            return self._vertex_points[edge.tail]
        if value == ONE:
            return self._vertex_points[edge.head]
        return TreePoint(edge_id, value)

    def vertex_point(self, vertex: str) -> TreePoint:
        try:
            return self._vertex_points[vertex]
        except KeyError:
            raise MalformedPointError(f"unknown vertex {vertex!r}") from None

    def normalize(self, p: TreePoint) -> TreePoint:
        return self.point(p.edge, p.t)

    def vertex_of(self, p: TreePoint) -> str | None:
        edge = self.edge(p.edge)
        if p.t == ZERO:
            return edge.tail
        if p.t == ONE:
            return edge.head
        return None

    def param_on(self, p: TreePoint, edge_id: str) -> Fraction | None:
        """Parameter of ``p`` on ``edge_id``, or None when ``p`` is not on it."""
        if p.edge == edge_id:
            return p.t
        vertex = self.vertex_of(p)
        if vertex is None:
            return None
        edge = self.edge(edge_id)
        if edge.tail == vertex:
            return ZERO
        if edge.head == vertex:
            return ONE
        return None

    def edges_of(self, p: TreePoint) -> tuple[str, ...]:
        vertex = self.vertex_of(p)
        return (p.edge,) if vertex is None else self._incident[vertex]

    def planar(self, p: TreePoint) -> tuple[Fraction, Fraction]:
        edge = self.edge(p.edge)
        (x0, y0), (x1, y1) = self._coords[edge.tail], self._coords[edge.head]
        return x0 + p.t * (x1 - x0), y0 + p.t * (y1 - y0)

    def unfolded(self, p: TreePoint) -> Fraction:
        """1-D coordinate with edges laid end to end in canonical order."""
        offset = ZERO
        for edge_id in self.edge_order:
            edge = self._edges[edge_id]
            if edge_id == p.edge:
                return offset + p.t * edge.length
            offset += edge.length
        raise MalformedPointError(f"unknown edge id {p.edge!r}")

    # -- metric -----------------------------------------------------------------

    def _vertex_gap(self, u: str, v: str) -> Fraction:
        (x0, y0), (x1, y1) = self._coords[u], self._coords[v]
        return max(abs(x1 - x0), abs(y1 - y0))

    def _ends(self, p: TreePoint) -> tuple[tuple[str, Fraction], tuple[str, Fraction]]:
        edge = self.edge(p.edge)
        return (edge.tail, p.t * edge.length), (edge.head, (ONE - p.t) * edge.length)

    def distance(self, p: TreePoint, q: TreePoint) -> Fraction:
        """Exact distance; the path metric unless the tree is embedded."""
        if self.is_embedded:
            (px, py), (qx, qy) = self.planar(p), self.planar(q)
            return max(abs(px - qx), abs(py - qy))
        if p.edge == q.edge:
            return abs(p.t - q.t) * self.edge(p.edge).length
        for edge_id in self.edges_of(p):
            tq = self.param_on(q, edge_id)
            if tq is not None:
                tp = self.param_on(p, edge_id)
                assert tp is not None
                return abs(tp - tq) * self._edges[edge_id].length
        table = self._vertex_distances
        return min(
            a + table[u][v] + b for u, a in self._ends(p) for v, b in self._ends(q)
        )

    def distance_to_vertex(self, p: TreePoint, vertex: str) -> Fraction:
        return self.distance(p, self.vertex_point(vertex))

    def distance_to_segment(self, p: TreePoint, segment: Segment) -> Fraction:
        length = self.edge(segment.edge).length
        if self.is_embedded:
            return self._linf_to_segment(p, segment)
        tp = self.param_on(p, segment.edge)
        if tp is not None:
            nearest = min(max(tp, segment.lo), segment.hi)
            return abs(nearest - tp) * length
        return min(
            self.distance(p, self.point(segment.edge, segment.lo)),
            self.distance(p, self.point(segment.edge, segment.hi)),
        )

    def _linf_to_segment(self, p: TreePoint, segment: Segment) -> Fraction:
        # max(|x(t)-px|, |y(t)-py|) is convex piecewise linear in t, so its minimum
        # sits at an end or where a term vanishes or the two terms cross.
        px, py = self.planar(p)
        edge = self.edge(segment.edge)
        (x0, y0), (x1, y1) = self._coords[edge.tail], self._coords[edge.head]
        dx, dy = x1 - x0, y1 - y0
        candidates = {segment.lo, segment.hi}
        if dx:
            candidates.add((px - x0) / dx)
        if dy:
            candidates.add((py - y0) / dy)
        for sign in (1, -1):
            slope = dx - sign * dy
            if slope:
                candidates.add((px - x0 - sign * (py - y0)) / slope)
        best: Fraction | None = None
        for t in candidates:
            if segment.lo <= t <= segment.hi:
                gap = max(abs(x0 + t * dx - px), abs(y0 + t * dy - py))
                best = gap if best is None else min(best, gap)
        assert best is not None
        return best

    def distance_to_subtree(self, p: TreePoint, region: SubtreeSet) -> Fraction:
        if not region:
            raise EmptySetError("distance to an empty subtree set")
        return min(self.distance_to_segment(p, segment) for segment in region)

    def _index_gap(self, p: TreePoint, index: dict[str, list[Fraction]]) -> Fraction | None:
        """Distance from ``p`` to points stored per edge as sorted parameters."""
        best: Fraction | None = None
        for edge_id, params in index.items():
            tp = self.param_on(p, edge_id)
            if tp is not None:
                pos = bisect.bisect_left(params, tp)
                near = [params[i] for i in (pos - 1, pos) if 0 <= i < len(params)]
                gap = min(abs(t - tp) for t in near) * self._edges[edge_id].length
            else:
                # Along an edge not containing p the distance is monotone from
                # the end nearest p, so the extreme parameters suffice.
                gap = min(
                    self.distance(p, TreePoint(edge_id, params[0])),
                    self.distance(p, TreePoint(edge_id, params[-1])),
                )
            if best is None or gap < best:
                best = gap
                if best == ZERO:
                    break
        return best

    def nearest(self, points: Sequence[TreePoint]) -> Callable[[TreePoint], Fraction]:
        """Return ``p -> d(p, points)``; indexed per edge under the path metric."""
        if not points:
            raise EmptySetError("distance to an empty point set")
        if self.is_embedded:
            frozen = tuple(points)
            return lambda p: min(self.distance(p, q) for q in frozen)

        per_edge: dict[str, list[Fraction]] = {}
        for q in points:
            per_edge.setdefault(q.edge, []).append(q.t)
        index = {edge_id: sorted(set(ts)) for edge_id, ts in per_edge.items()}

        def _nearest(p: TreePoint) -> Fraction:
            gap = self._index_gap(p, index)
            assert gap is not None
            return gap

        return _nearest

    def epsilon_net(self, points: Iterable[TreePoint], eps: Fraction) -> FiniteSet[TreePoint]:
        """Greedy net in canonical order: kept points are more than ``eps`` apart."""
        kept: list[TreePoint] = []
        if self.is_embedded:
            for p in sorted(set(points)):
                if all(self.distance(p, q) > eps for q in kept):
                    kept.append(p)
            return FiniteSet(tuple(kept))
        index: dict[str, list[Fraction]] = {}
        for p in sorted(set(points)):
            gap = self._index_gap(p, index)
            if gap is None or gap > eps:
                kept.append(p)
                bisect.insort(index.setdefault(p.edge, []), p.t)
        return FiniteSet(tuple(kept))

    # -- segment sets -----------------------------------------------------------

    def segment(self, edge_id: str, lo: Fraction | int, hi: Fraction | int) -> Segment:
        self.edge(edge_id)
        low, high = Fraction(lo), Fraction(hi)
        if not ZERO <= low <= high <= ONE:
            raise MalformedPointError(f"segment [{low}, {high}] out of [0,1] on {edge_id!r}")
        return Segment(edge_id, low, high)

    def segment_contains(self, segment: Segment, p: TreePoint) -> bool:
        tp = self.param_on(p, segment.edge)
        return tp is not None and segment.contains_param(tp)

    def subtree(self, segments: Iterable[Segment]) -> SubtreeSet:
        """Canonicalize a union of segments: merge per edge, fold stray points."""
        solid: dict[str, list[tuple[Fraction, Fraction]]] = {}
        points: set[TreePoint] = set()
        for seg in segments:
            if seg.degenerate:
                points.add(self.point(seg.edge, seg.lo))
            else:
                solid.setdefault(seg.edge, []).append((seg.lo, seg.hi))
        merged: list[Segment] = []
        for edge_id in sorted(solid):
            spans = sorted(solid[edge_id])
            lo, hi = spans[0]
            for next_lo, next_hi in spans[1:]:
                if next_lo <= hi:
                    hi = max(hi, next_hi)
                else:
                    merged.append(Segment(edge_id, lo, hi))
                    lo, hi = next_lo, next_hi
            merged.append(Segment(edge_id, lo, hi))
        for p in points:
            if not any(self.segment_contains(seg, p) for seg in merged):
                merged.append(Segment(p.edge, p.t, p.t))
        return SubtreeSet(tuple(sorted(merged)))

    def whole(self) -> SubtreeSet:
        return SubtreeSet(tuple(Segment(edge_id, ZERO, ONE) for edge_id in self.edge_order))

    def segments_meet(self, first: Segment, second: Segment) -> bool:
        if first.edge == second.edge:
            return max(first.lo, second.lo) <= min(first.hi, second.hi)
        a, b = self.edge(first.edge), self.edge(second.edge)
        for vertex in {a.tail, a.head} & {b.tail, b.head}:
            p = self.vertex_point(vertex)
            if self.segment_contains(first, p) and self.segment_contains(second, p):
                return True
        return False

    def intersects(self, first: SubtreeSet, second: SubtreeSet) -> bool:
        return any(self.segments_meet(a, b) for a in first for b in second)

    def contains(self, region: SubtreeSet, p: TreePoint) -> bool:
        return any(self.segment_contains(seg, p) for seg in region)

    def components(self, segments: Iterable[Segment]) -> list[SubtreeSet]:
        """Connected components of a union of segments, in canonical order."""
        canonical = self.subtree(segments).segments
        graph = nx.Graph()
        graph.add_nodes_from(range(len(canonical)))
        for i, first in enumerate(canonical):
            for j in range(i + 1, len(canonical)):
                if self.segments_meet(first, canonical[j]):
                    graph.add_edge(i, j)
        parts = [
            SubtreeSet(tuple(canonical[i] for i in sorted(group)))
            for group in nx.connected_components(graph)
        ]
        return sorted(parts, key=lambda part: part.segments)

    def endpoints(self, region: SubtreeSet) -> FiniteSet[TreePoint]:
        found: set[TreePoint] = set()
        for seg in region:
            found.add(self.point(seg.edge, seg.lo))
            found.add(self.point(seg.edge, seg.hi))
        return FiniteSet.of(found)

    def segment_net(self, region: SubtreeSet, eps: Fraction) -> FiniteSet[TreePoint]:
        """Sample every segment at pitch at most ``eps`` (both ends included)."""
        found: set[TreePoint] = set()
        for seg in region:
            span = (seg.hi - seg.lo) * self.edge(seg.edge).length
            steps = max(1, math.ceil(span / eps)) if span else 1
            width = (seg.hi - seg.lo) / steps
            for k in range(steps + 1):
                found.add(self.point(seg.edge, seg.lo + k * width))
        return FiniteSet.of(found)

    # -- balls ------------------------------------------------------------------

    def _ball_span(self, p: TreePoint, r: Fraction, edge: Edge) -> tuple[Fraction, Fraction] | None:
        if self.is_embedded:
            return self._linf_span(p, r, edge)
        length = edge.length
        tp = self.param_on(p, edge.id)
        if tp is not None:
            lo, hi = max(ZERO, tp - r / length), min(ONE, tp + r / length)
            return lo, hi
        spans: list[tuple[Fraction, Fraction]] = []
        reach_tail = r - self.distance_to_vertex(p, edge.tail)
        if reach_tail >= 0:
            spans.append((ZERO, min(ONE, reach_tail / length)))
        reach_head = r - self.distance_to_vertex(p, edge.head)
        if reach_head >= 0:
            spans.append((max(ZERO, ONE - reach_head / length), ONE))
        if not spans:
            return None
        return min(lo for lo, _ in spans), max(hi for _, hi in spans)

    def _linf_span(self, p: TreePoint, r: Fraction, edge: Edge) -> tuple[Fraction, Fraction] | None:
        px, py = self.planar(p)
        (x0, y0), (x1, y1) = self._coords[edge.tail], self._coords[edge.head]
        lo, hi = ZERO, ONE
        for start, delta, centre in ((x0, x1 - x0, px), (y0, y1 - y0, py)):
            if delta == 0:
                if abs(start - centre) > r:
                    return None
                continue
            a, b = (centre - r - start) / delta, (centre + r - start) / delta
            lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
        if lo > hi:
            return None
        return lo, hi

    def ball(self, p: TreePoint, r: Fraction) -> Ball:
        """Closed ball of radius ``r`` with its (finite) boundary point set."""
        spans: dict[str, tuple[Fraction, Fraction]] = {}
        for edge in self.edges:
            span = self._ball_span(p, r, edge)
            if span is not None:
                spans[edge.id] = span
        region = self.subtree(Segment(edge_id, lo, hi) for edge_id, (lo, hi) in spans.items())

        def _enters(edge_id: str, t: Fraction) -> bool:
            span = spans.get(edge_id)
            if span is None or span[0] == span[1]:
                return False
            return span[0] == t if t == ZERO else span[1] == t

        boundary: set[TreePoint] = set()
        for edge_id, (lo, hi) in spans.items():
            for t in (lo, hi):
                q = self.point(edge_id, t)
                if self.distance(p, q) != r:
                    continue
                vertex = self.vertex_of(q)
                if vertex is None:
                    boundary.add(q)
                    continue
                for other in self._incident[vertex]:
                    tv = self.param_on(q, other)
                    assert tv is not None
                    if not _enters(other, tv):
                        boundary.add(q)
                        break
        return Ball(region, FiniteSet.of(boundary))

    def diameter_of(self, region: SubtreeSet) -> Fraction:
        ends = self.endpoints(region).points
        return max((self.distance(a, b) for a in ends for b in ends), default=ZERO)


def distance(space: TreeSpace, p: TreePoint, q: TreePoint) -> Fraction:
    """Arc-length (or planar) distance between two points of ``space``."""
    return space.distance(space.normalize(p), space.normalize(q))


def hausdorff_distance(a: Iterable[P], b: Iterable[P], space: MetricSpace[P]) -> Fraction:
    """Exact Hausdorff distance between two non-empty finite sets."""
    first, second = tuple(a), tuple(b)
    if not first or not second:
        raise EmptySetError("Hausdorff distance needs two non-empty sets")
    to_second = space.nearest(second)
    to_first = space.nearest(first)
    forward = max(to_second(p) for p in first)
    backward = max(to_first(q) for q in second)
    return max(forward, backward)


def directed_distance(a: Iterable[P], b: Iterable[P], space: MetricSpace[P]) -> Fraction:
    """sup over ``a`` of the distance to ``b``."""
    first, second = tuple(a), tuple(b)
    if not first:
        return ZERO
    if not second:
        raise EmptySetError("distance to an empty set")
    to_second = space.nearest(second)
    return max(to_second(p) for p in first)


def mesh(space: TreeSpace, region: SubtreeSet | Iterable[Segment]) -> Fraction:
    """Largest diameter of a connected component; 0 for the empty set."""
    parts = space.components(region)
    return max((space.diameter_of(part) for part in parts), default=ZERO)


def ball(space: TreeSpace, p: TreePoint, r: Fraction) -> Ball:
    if r <= 0:
        raise MalformedPointError("ball radius must be positive")
    return space.ball(space.normalize(p), Fraction(r))


def sample_grid(space: TreeSpace, pitch: Fraction | None = None) -> FiniteSet[TreePoint]:
    """Points at spacing at most ``pitch`` along every edge (vertices included)."""
    step = pitch if pitch is not None else space.shortest_edge / 64
    if step <= 0:
        raise MalformedPointError("grid pitch must be positive")
    return space.segment_net(space.whole(), step)


def star_space(beams: Sequence[tuple[str, str, Fraction]], center: str = "z0") -> TreeSpace:
    """Star centred at ``center``; each beam is ``(edge id, endpoint id, length)``."""
    vertices = (center, *(end for _, end, _ in beams))
    edges = tuple(Edge(edge_id, center, end, length) for edge_id, end, length in beams)
    return TreeSpace(vertices, edges, center)
