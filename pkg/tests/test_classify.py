"""Unit tests for point classification."""

from __future__ import annotations

import unittest
from fractions import Fraction as F

from dynamics.classify import (
    basin,
    check_weak_incompressibility,
    classify_point,
    is_almost_periodic,
    is_minimal,
    is_nonwandering,
    is_periodic,
    is_recurrent,
    nonwandering_set,
    recurrent_set,
)
from dynamics.examples import (
    build_dendroid_example,
    build_star_map,
    build_tent_tail,
    dendroid_epsilon,
)
from dynamics.limits import Budgets
from dynamics.space import TreePoint
from dynamics.systems import Outcome

EPS = F(1, 256)


class PeriodicAndRecurrentTests(unittest.TestCase):
    """Validates periodicity and recurrence verdicts."""

    def test_star_endpoint_is_periodic(self) -> None:
        f = build_star_map(4)
        verdict = is_periodic(f, f.space.vertex_point("z4.3"), 10)
        self.assertEqual(verdict.outcome, Outcome.PASS)
        self.assertEqual(verdict.witness["period"], 4)
        self.assertFalse(verdict.budget_relative)

    def test_interior_point_is_not_periodic_within_budget(self) -> None:
        f = build_star_map(4)
        verdict = is_periodic(f, TreePoint("I4.0", F(3, 4)), 10)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertTrue(verdict.budget_relative)

    def test_endpoint_of_tent_tail_is_recurrent(self) -> None:
        f = build_tent_tail()
        verdict = is_recurrent(f, f.space.vertex_point("z1.0"), EPS)
        self.assertEqual(verdict.outcome, Outcome.PASS)
        self.assertEqual(verdict.witness["return_time"], 1)

    def test_interior_of_tent_tail_is_not_recurrent(self) -> None:
        f = build_tent_tail()
        verdict = is_recurrent(f, TreePoint("I1.0", F(3, 4)), EPS)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertEqual(verdict.witness["distance"], F(3, 4))
        self.assertFalse(verdict.budget_relative)


class NonwanderingTests(unittest.TestCase):
    """Validates the exact ball-return test."""

    def test_centre_of_tent_tail_returns_at_once(self) -> None:
        f = build_tent_tail()
        verdict = is_nonwandering(f, f.space.vertex_point("z0"), EPS, 16)
        self.assertEqual(verdict.outcome, Outcome.PASS)
        self.assertEqual(verdict.witness["return_time"], 1)

    def test_interior_point_fails_with_certified_cycle(self) -> None:
        f = build_tent_tail()
        verdict = is_nonwandering(f, TreePoint("I1.0", F(3, 4)), EPS, 64)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertFalse(verdict.budget_relative)
        self.assertIn("cycle_length", verdict.witness)

    def test_dendroid_t1_is_nonwandering_but_not_recurrent(self) -> None:
        f = build_dendroid_example(8, 12)
        eps = dendroid_epsilon(12)
        t1 = f.space.vertex_point("T1")
        self.assertEqual(is_nonwandering(f, t1, eps, 64).outcome, Outcome.PASS)
        recurrent = is_recurrent(f, t1, eps, Budgets(epsilon=eps))
        self.assertEqual(recurrent.outcome, Outcome.FAIL)
        self.assertFalse(recurrent.budget_relative)


class AlmostPeriodicAndMinimalTests(unittest.TestCase):
    """Validates syndetic returns and minimality."""

    def test_fixed_point_has_zero_gap(self) -> None:
        f = build_tent_tail()
        verdict = is_almost_periodic(f, f.space.vertex_point("z0"), EPS, 8, 20)
        self.assertEqual(verdict.outcome, Outcome.PASS)
        self.assertEqual(verdict.witness["syndetic_gap"], 0)

    def test_star_endpoint_gap_is_period_minus_one(self) -> None:
        f = build_star_map(3)
        verdict = is_almost_periodic(f, f.space.vertex_point("z3.0"), EPS, 8, 20)
        self.assertEqual(verdict.witness["syndetic_gap"], 2)

    def test_transient_point_is_not_almost_periodic(self) -> None:
        f = build_tent_tail()
        verdict = is_almost_periodic(f, TreePoint("I1.0", F(3, 4)), EPS, 8, 20)
        self.assertEqual(verdict.outcome, Outcome.FAIL)

    def test_periodic_orbit_is_minimal(self) -> None:
        f = build_star_map(3)
        ends = [f.space.vertex_point(f"z3.{k}") for k in range(3)]
        self.assertEqual(is_minimal(f, ends, EPS, 16).outcome, Outcome.PASS)
        with_centre = [f.space.vertex_point("z0"), ends[0]]
        verdict = is_minimal(f, with_centre, EPS, 16)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertEqual(verdict.witness["from"], f.space.vertex_point("z0"))


class SetQueryTests(unittest.TestCase):
    """Validates basins, grid sets, incompressibility and full classification."""

    def setUp(self) -> None:
        self.f = build_tent_tail()
        self.grid = [self.f.space.point("I1.0", F(k, 8)) for k in range(9)]
        self.ends = {self.f.space.vertex_point("z0"), self.f.space.vertex_point("z1.0")}

    def test_basin_of_centre(self) -> None:
        found = basin(self.f, [self.f.space.vertex_point("z0")], self.grid, EPS)
        self.assertEqual(len(found), 8)
        self.assertNotIn(self.f.space.vertex_point("z1.0"), found)

    def test_recurrent_and_nonwandering_sets(self) -> None:
        self.assertEqual(set(recurrent_set(self.f, self.grid, EPS)), self.ends)
        self.assertEqual(set(nonwandering_set(self.f, self.grid, EPS, 64)), self.ends)

    def test_weak_incompressibility(self) -> None:
        centre, end = self.f.space.vertex_point("z0"), self.f.space.vertex_point("z1.0")
        half = TreePoint("I1.0", F(1, 2))
        missed = check_weak_incompressibility(self.f, [centre, end], [end], EPS)
        self.assertEqual(missed.outcome, Outcome.FAIL)
        verdict = check_weak_incompressibility(self.f, [centre, half], [centre], EPS)
        self.assertEqual(verdict.outcome, Outcome.PASS)
        self.assertEqual(verdict.witness["point"], half)
        with self.assertRaises(ValueError):
            check_weak_incompressibility(self.f, [centre, end], [centre, end], EPS)

    def test_classify_point_reports_every_class(self) -> None:
        f = build_star_map(3)
        verdicts = classify_point(f, f.space.vertex_point("z3.1"), Budgets(epsilon=EPS))
        self.assertEqual(
            [v.query for v in verdicts],
            ["periodic", "almost_periodic", "recurrent", "nonwandering"],
        )
        self.assertTrue(all(v.passed for v in verdicts))
