"""JSON and CSV output for limit sets, verdicts and suite reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Mapping
from dataclasses import asdict
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any

from config import settings
from dynamics.examples import cantor_coordinate
from dynamics.limits import Budgets, SetApprox
from dynamics.space import FiniteSet, Segment, SubtreeSet, TreePoint, TreeSpace
from dynamics.symbolic import SymbolicPoint
from dynamics.systems import Verdict
from dynamics.verify import SuiteReport

logger = logging.getLogger(__name__)

SYMBOLIC_PRECISION = 64


def encode_rational(value: Fraction | int) -> dict[str, Any]:
    exact = Fraction(value)
    return {"exact": f"{exact.numerator}/{exact.denominator}", "decimal": float(exact)}


def encode_point(point: Any, space: TreeSpace | None = None) -> dict[str, Any]:
    if isinstance(point, SymbolicPoint):
        return {"symbolic": str(point)}
    payload: dict[str, Any] = {"edge": point.edge, "parameter": encode_rational(point.t)}
    if space is not None:
        payload["unfolded"] = encode_rational(space.unfolded(point))
        vertex = space.vertex_of(point)
        if vertex is not None:
            payload["vertex"] = vertex
    return payload


def encode(value: Any, space: TreeSpace | None = None) -> Any:
    """Convert domain values to JSON-ready structures."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return encode_rational(value)
    if isinstance(value, int):
        return value
    if isinstance(value, TreePoint | SymbolicPoint):
        return encode_point(value, space)
    if isinstance(value, Segment):
        lo, hi = encode_rational(value.lo), encode_rational(value.hi)
        return {"edge": value.edge, "lo": lo, "hi": hi}
    if isinstance(value, SubtreeSet):
        return [encode(segment, space) for segment in value.segments]
    if isinstance(value, FiniteSet):
        return [encode(point, space) for point in value.points]
    if isinstance(value, Mapping):
        return {str(key): encode(item, space) for key, item in value.items()}
    if isinstance(value, Iterable):
        return [encode(item, space) for item in value]
    return str(value)


def encode_budgets(budgets: Budgets) -> dict[str, Any]:
    return {key: encode(value) for key, value in asdict(budgets).items()}


def encode_set_approx(approx: SetApprox, space: TreeSpace | None = None) -> dict[str, Any]:
    payload = {
        "kind": approx.kind.value,
        "points": encode(approx.points, space),
        "size": len(approx.points),
        "resolution": encode_rational(approx.resolution),
        "depth": approx.depth,
        "budget": approx.budget,
        "converged": approx.converged,
        "exact": approx.exact,
    }
    if approx.negative_orbit:
        payload["negative_orbit"] = encode(approx.negative_orbit, space)
    if approx.diagnostic:
        payload["diagnostic"] = approx.diagnostic
    return payload


def encode_verdict(verdict: Verdict, space: TreeSpace | None = None) -> dict[str, Any]:
    return {
        "query": verdict.query,
        "subject": encode(verdict.subject, space),
        "outcome": verdict.outcome.value,
        "witness": encode(verdict.witness, space),
        "parameters": encode(verdict.parameters, space),
        "budget_relative": verdict.budget_relative,
    }


def encode_suite(report: SuiteReport, space: TreeSpace | None = None) -> dict[str, Any]:
    return {
        "suite": report.suite,
        "system": report.system,
        "samples": report.samples,
        "status": report.status.value,
        "expected_fail": report.expected_fail,
        "counts": report.counts,
        "verdicts": [encode_verdict(v, space) for v in report.verdicts],
        "notes": list(report.notes),
    }


def envelope(
    command: str,
    system: str,
    budgets: Budgets,
    result: Mapping[str, Any],
    parameters: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Top-level report carrying the schema version and full budget provenance."""
    return {
        "schema_version": settings.REPORT_SCHEMA_VERSION,
        "tool": settings.APP_NAME,
        "command": command,
        "system": system,
        "budgets": encode_budgets(budgets),
        "parameters": encode(parameters or {}),
        "result": dict(result),
    }


def write_atomic(path: Path | str, text: str) -> Path:
    """Write ``text`` next to ``path`` and rename it into place."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, temp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temp, target)
    except BaseException:
        Path(temp).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)
    return target


def write_json(path: Path | str, payload: Mapping[str, Any]) -> Path:
    return write_atomic(path, json.dumps(payload, ensure_ascii=False, indent=2) + "\n")


def points_csv(points: Iterable[Any], space: TreeSpace | None = None) -> str:
    """``edge,parameter,unfolded`` rows; symbolic points use their Cantor coordinate."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["edge", "parameter", "unfolded"])
    for point in points:
        if isinstance(point, SymbolicPoint):
            value = float(cantor_coordinate(point, SYMBOLIC_PRECISION))
            writer.writerow([str(point), value, value])
        else:
            unfolded = float(space.unfolded(point)) if space is not None else float(point.t)
            writer.writerow([point.edge, float(point.t), unfolded])
    return buffer.getvalue()


def write_points_csv(
    path: Path | str, points: Iterable[Any], space: TreeSpace | None = None
) -> Path:
    return write_atomic(path, points_csv(points, space))
