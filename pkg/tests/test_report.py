"""Unit tests for JSON and CSV reports."""

from __future__ import annotations

import json
import tempfile
import unittest
from dataclasses import replace
from fractions import Fraction as F
from pathlib import Path

from jsonschema import Draft202012Validator

from config import settings
from dynamics.classify import classify_point
from dynamics.examples import build_star_map, build_tent_tail
from dynamics.limits import Budgets, omega_limit
from dynamics.report import (
    encode_point,
    encode_rational,
    encode_set_approx,
    encode_suite,
    encode_verdict,
    envelope,
    points_csv,
    write_atomic,
    write_json,
)
from dynamics.space import TreePoint
from dynamics.symbolic import t_point
from dynamics.verify import run_suite, suite_budgets

SCHEMA = json.loads(settings.REPORT_SCHEMA_PATH.read_text(encoding="utf-8"))


class EncodingTests(unittest.TestCase):
    """Validates exact encodings of rationals and points."""

    def test_rational_keeps_exact_form(self) -> None:
        self.assertEqual(encode_rational(F(-3, 4)), {"exact": "-3/4", "decimal": -0.75})
        self.assertEqual(encode_rational(2), {"exact": "2/1", "decimal": 2.0})

    def test_tree_point_carries_vertex_name(self) -> None:
        space = build_tent_tail().space
        encoded = encode_point(space.vertex_point("z1.0"), space)
        self.assertEqual(encoded["vertex"], "z1.0")
        self.assertEqual(encoded["unfolded"]["exact"], "1/1")
        self.assertNotIn("vertex", encode_point(TreePoint("I1.0", F(1, 3)), space))

    def test_symbolic_point(self) -> None:
        self.assertEqual(encode_point(t_point(-2)), {"symbolic": "T-2"})


class SchemaTests(unittest.TestCase):
    """Validates report envelopes against the published schema."""

    def setUp(self) -> None:
        self.validator = Draft202012Validator(SCHEMA)
        self.budgets = Budgets(epsilon=F(1, 256), depth=16, window=32, transient=32, time_budget=64)

    def test_limits_report(self) -> None:
        f = build_tent_tail()
        approx = omega_limit(f, TreePoint("I1.0", F(3, 4)), F(1, 256))
        result = encode_set_approx(approx, f.space)
        report = envelope("limits", f.name, self.budgets, result, {"kind": "omega"})
        self.validator.validate(report)
        self.assertEqual(report["result"]["size"], 1)
        self.assertEqual(report["budgets"]["epsilon"]["exact"], "1/256")

    def test_classify_report(self) -> None:
        f = build_star_map(2)
        verdicts = classify_point(f, f.space.vertex_point("z2.0"), self.budgets)
        result = {"verdicts": [encode_verdict(v, f.space) for v in verdicts]}
        self.validator.validate(envelope("classify", f.name, self.budgets, result))

    def test_suite_report(self) -> None:
        f = build_tent_tail()
        budgets = replace(suite_budgets(), depth=16, window=32, transient=32, time_budget=64)
        grid = [f.space.point("I1.0", F(k, 4)) for k in range(5)]
        suite = run_suite("omega-eq-ap", f, budgets, grid)
        result = encode_suite(suite, f.space)
        report = envelope("verify", f.name, budgets, result, {"suite": suite.suite})
        self.validator.validate(report)
        self.assertEqual(report["result"]["status"], "PASS")

    def test_unknown_command_is_rejected(self) -> None:
        report = envelope("plot", "tent-tail", self.budgets, {"verdicts": []})
        self.assertFalse(self.validator.is_valid(report))


class FileOutputTests(unittest.TestCase):
    """Validates CSV rows and atomic writes."""

    def test_points_csv(self) -> None:
        space = build_tent_tail().space
        text = points_csv([TreePoint("I1.0", F(1, 2)), t_point(0)], space)
        self.assertEqual(
            text.splitlines(), ["edge,parameter,unfolded", "I1.0,0.5,0.5", "T0,0.0,0.0"]
        )

    def test_write_atomic_replaces_and_leaves_no_temp_files(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "nested" / "out.json"
            write_json(target, {"a": 1})
            write_atomic(target, "second\n")
            self.assertEqual(target.read_text(encoding="utf-8"), "second\n")
            self.assertEqual([p.name for p in target.parent.iterdir()], ["out.json"])
