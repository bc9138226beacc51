"""Line-oriented system descriptions: parsing, validation and printing.

One declaration per line::

    vertex ID [X Y]
    edge ID U V LENGTH
    root V
    segment EDGE LO HI -> PATH A B
    example NAME[:params]

``PATH`` is a comma-separated walk of edge ids (``~ID`` walks an edge backwards)
and ``#`` starts a comment. Rationals are written ``p/q``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from dynamics.errors import DescriptionError, Diagnostic, MalformedMapError
from dynamics.examples import build_example
from dynamics.space import ONE, ZERO, Edge, TreeSpace
from dynamics.systems import PathRule, PwAffineTreeMap, ShiftSystem

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class SystemDescription:
    vertices: tuple[str, ...] = ()
    coordinates: tuple[tuple[str, Fraction, Fraction], ...] = ()
    edges: tuple[Edge, ...] = ()
    root: str | None = None
    segments: tuple[PathRule, ...] = ()
    example: str | None = None
    origins: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    locations: dict[str, tuple[int, int]] = field(
        default_factory=dict, compare=False, repr=False
    )

    @property
    def declares_space(self) -> bool:
        return bool(self.vertices or self.edges)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class _Parser:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []
        self.vertices: list[str] = []
        self.coordinates: list[tuple[str, Fraction, Fraction]] = []
        self.edges: list[Edge] = []
        self.root: str | None = None
        self.segments: list[PathRule] = []
        self.example: str | None = None
        self.origins: dict[str, int] = {}
        self.locations: dict[str, tuple[int, int]] = {}
        self.first_segment: dict[str, tuple[int, int]] = {}

    def error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(line, column, message))

    def rational(self, line: int, token: tuple[int, str], what: str) -> Fraction | None:
        column, text = token
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            self.error(line, column, f"{what} {text!r} is not a rational p/q")
            return None

    def parameter(self, line: int, token: tuple[int, str]) -> Fraction | None:
        value = self.rational(line, token, "parameter")
        if value is not None and not ZERO <= value <= ONE:
            self.error(line, token[0], f"parameter out of [0,1]: {token[1]}")
            return None
        return value

    def feed(self, number: int, raw: str) -> None:
        text = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(text)]
        if not tokens:
            return
        keyword = tokens[0][1]
        handler = {
            "vertex": self.vertex,
            "edge": self.edge,
            "root": self.root_line,
            "segment": self.segment,
            "example": self.example_line,
        }.get(keyword)
        if handler is None:
            self.error(number, tokens[0][0], f"unknown declaration {keyword!r}")
            return
        handler(number, tokens)

    def arity(self, number: int, tokens: list[tuple[int, str]], *counts: int) -> bool:
        if len(tokens) in counts:
            return True
        expected = " or ".join(str(c - 1) for c in counts)
        self.error(number, tokens[0][0], f"{tokens[0][1]} takes {expected} argument(s)")
        return False

    def vertex(self, number: int, tokens: list[tuple[int, str]]) -> None:
        if not self.arity(number, tokens, 2, 4):
            return
        name = tokens[1][1]
        if name in self.vertices:
            self.error(number, tokens[1][0], f"duplicate vertex {name!r}")
            return
        self.vertices.append(name)
        self.origins[f"vertex {name}"] = number
        self.locations[f"vertex {name}"] = (number, tokens[1][0])
        if len(tokens) == 4:
            x = self.rational(number, tokens[2], "coordinate")
            y = self.rational(number, tokens[3], "coordinate")
            if x is not None and y is not None:
                self.coordinates.append((name, x, y))

    def edge(self, number: int, tokens: list[tuple[int, str]]) -> None:
        if not self.arity(number, tokens, 5):
            return
        name = tokens[1][1]
        ok = True
        for column, vertex in tokens[2:4]:
            if vertex not in self.vertices:
                self.error(number, column, f"unknown vertex {vertex!r}")
                ok = False
        length = self.rational(number, tokens[4], "length")
        if length is not None and length <= 0:
            self.error(number, tokens[4][0], f"negative or zero length {tokens[4][1]}")
            ok = False
        if any(edge.id == name for edge in self.edges):
            self.error(number, tokens[1][0], f"duplicate edge {name!r}")
            ok = False
        if ok and length is not None:
            self.edges.append(Edge(name, tokens[2][1], tokens[3][1], length))
            self.origins[f"edge {name}"] = number
            self.locations[f"edge {name}"] = (number, tokens[1][0])

    def root_line(self, number: int, tokens: list[tuple[int, str]]) -> None:
        if not self.arity(number, tokens, 2):
            return
        column, vertex = tokens[1]
        if vertex not in self.vertices:
            self.error(number, column, f"unknown vertex {vertex!r}")
            return
        self.root = vertex

    def segment(self, number: int, tokens: list[tuple[int, str]]) -> None:
        if not self.arity(number, tokens, 8):
            return
        if tokens[4][1] != "->":
            self.error(number, tokens[4][0], "expected '->' before the target path")
            return
        column, edge_id = tokens[1]
        known = {edge.id for edge in self.edges}
        ok = edge_id in known
        if not ok:
            self.error(number, column, f"unknown edge {edge_id!r}")
        lo, hi = self.parameter(number, tokens[2]), self.parameter(number, tokens[3])
        path = tuple(tokens[5][1].split(","))
        for step in path:
            if step.removeprefix("~") not in known:
                self.error(number, tokens[5][0], f"unknown edge {step!r} in target path")
                ok = False
        a = self.rational(number, tokens[6], "coefficient")
        b = self.rational(number, tokens[7], "coefficient")
        if not ok or None in (lo, hi, a, b):
            return
        assert lo is not None and hi is not None and a is not None and b is not None
        if lo >= hi:
            self.error(number, tokens[2][0], f"empty segment [{tokens[2][1]}, {tokens[3][1]}]")
            return
        self.locations[f"segment {len(self.segments)}"] = (number, column)
        self.segments.append(PathRule(edge_id, lo, hi, path, a, b))
        self.first_segment.setdefault(edge_id, (number, column))

    def example_line(self, number: int, tokens: list[tuple[int, str]]) -> None:
        if not self.arity(number, tokens, 2):
            return
        if self.example is not None:
            self.error(number, tokens[0][0], "only one example may be declared")
            return
        self.example = tokens[1][1]
        self.origins["example"] = number

    def check_coverage(self) -> None:
        by_edge: dict[str, list[PathRule]] = {}
        for rule in self.segments:
            by_edge.setdefault(rule.edge, []).append(rule)
        for edge in self.edges:
            rules = sorted(by_edge.get(edge.id, []), key=lambda r: (r.lo, r.hi))
            line = self.origins[f"edge {edge.id}"]
            if not rules:
                self.error(line, 1, f"edge {edge.id!r} has no segments")
                continue
            start = self.first_segment[edge.id]
            position = ZERO
            for rule in rules:
                if rule.lo != position:
                    self.error(
                        start[0], start[1],
                        f"non-contiguous breakpoints on {edge.id!r} at {format_rational(position)}",
                    )
                    break
                position = rule.hi
            else:
                if position != ONE:
                    self.error(start[0], start[1], f"segments on {edge.id!r} stop at {position}")

    def finish(self) -> SystemDescription:
        if self.example is not None and (self.vertices or self.edges or self.segments):
            self.error(self.origins["example"], 1, "example cannot be combined with a tree")
        if self.example is None and not self.edges and not self.diagnostics:
            self.error(1, 1, "no space declared")
        if self.example is None and self.edges:
            self.check_coverage()
        if self.diagnostics:
            raise DescriptionError(self.diagnostics)
        root = self.root if self.root is not None or not self.vertices else self.vertices[0]
        return SystemDescription(
            tuple(self.vertices),
            tuple(sorted(self.coordinates)),
            tuple(self.edges),
            root,
            tuple(self.segments),
            self.example,
            self.origins,
            self.locations,
        )


def parse_system(text: str) -> SystemDescription:
    """Parse and validate ``text``; raises ``DescriptionError`` with located diagnostics."""
    parser = _Parser()
    for number, raw in enumerate(text.splitlines(), start=1):
        parser.feed(number, raw)
    description = parser.finish()
    build_system(description)
    logger.debug(
        "Parsed description with %s edges and %s segments",
        len(description.edges),
        len(description.segments),
    )
    return description


def load_system(path: Path | str) -> SystemDescription:
    return parse_system(Path(path).read_text(encoding="utf-8"))


def build_system(
    description: SystemDescription, name: str = "system"
) -> PwAffineTreeMap | ShiftSystem:
    """Materialize a validated description; map-level faults become diagnostics."""
    if description.example is not None:
        try:
            return build_example(description.example)
        except ValueError as exc:
            line = description.origins.get("example", 1)
            raise DescriptionError([Diagnostic(line, 1, str(exc))]) from exc
    assert description.root is not None
    try:
        space = TreeSpace(
            description.vertices, description.edges, description.root, description.coordinates
        )
        return PwAffineTreeMap.from_rules(space, description.segments, name)
    except MalformedMapError as exc:
        line, column = _locate(description, exc)
        raise DescriptionError([Diagnostic(line, column, str(exc))]) from exc


def _locate(description: SystemDescription, exc: MalformedMapError) -> tuple[int, int]:
    """Declaration responsible for ``exc``: the segment holding the fault, else its edge."""
    where = description.locations
    if exc.vertex is not None and f"vertex {exc.vertex}" in where:
        return where[f"vertex {exc.vertex}"]
    if exc.edge is not None:
        owned = [
            (index, rule)
            for index, rule in enumerate(description.segments)
            if rule.edge == exc.edge
        ]
        if exc.at is not None:
            for index, rule in owned:
                if rule.lo == exc.at:
                    return where[f"segment {index}"]
            for index, rule in owned:
                if rule.lo <= exc.at <= rule.hi:
                    return where[f"segment {index}"]
        if owned:
            return where[f"segment {owned[0][0]}"]
        if f"edge {exc.edge}" in where:
            return where[f"edge {exc.edge}"]
    return min(where.values(), default=(1, 1))


def print_system(description: SystemDescription) -> str:
    """Inverse of ``parse_system``."""
    if description.example is not None:
        return f"example {description.example}\n"
    coords = {name: (x, y) for name, x, y in description.coordinates}
    lines = []
    for vertex in description.vertices:
        if vertex in coords:
            x, y = coords[vertex]
            lines.append(f"vertex {vertex} {format_rational(x)} {format_rational(y)}")
        else:
            lines.append(f"vertex {vertex}")
    for edge in description.edges:
        lines.append(f"edge {edge.id} {edge.tail} {edge.head} {format_rational(edge.length)}")
    if description.root is not None:
        lines.append(f"root {description.root}")
    for rule in description.segments:
        lines.append(
            f"segment {rule.edge} {format_rational(rule.lo)} {format_rational(rule.hi)} -> "
            f"{','.join(rule.path)} {format_rational(rule.a)} {format_rational(rule.b)}"
        )
    return "\n".join(lines) + "\n"


def describe_map(f: PwAffineTreeMap) -> SystemDescription:
    """Description of ``f`` with one single-edge segment per piece."""
    space = f.space
    return SystemDescription(
        vertices=space.vertices,
        coordinates=space.coordinates,
        edges=space.edges,
        root=space.root,
        segments=f.rules(),
    )
