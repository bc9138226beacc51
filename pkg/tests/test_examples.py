"""Unit tests for the example registry."""

from __future__ import annotations

import unittest
from fractions import Fraction as F

from dynamics.errors import MalformedMapError
from dynamics.examples import (
    EXAMPLES,
    build_dendroid_example,
    build_example,
    build_shift_example,
    default_epsilon,
    dendroid_epsilon,
    random_monotone_star,
)
from dynamics.systems import Outcome, PwAffineTreeMap, ShiftSystem, check_monotone

MONOTONE = ("tent-tail", "star:4", "inf-star:5", "e616:6", "dendroid:3,6", "collapsing-star")


class RegistryTests(unittest.TestCase):
    """Validates example lookup and parameter parsing."""

    def test_monotone_examples_pass_the_check(self) -> None:
        for text in MONOTONE:
            f = build_example(text)
            self.assertIsInstance(f, PwAffineTreeMap)
            assert isinstance(f, PwAffineTreeMap)
            self.assertEqual(check_monotone(f).outcome, Outcome.PASS, text)
            self.assertEqual(f.name, text)

    def test_full_tent_is_not_monotone(self) -> None:
        f = build_example("full-tent")
        assert isinstance(f, PwAffineTreeMap)
        self.assertEqual(check_monotone(f).outcome, Outcome.FAIL)

    def test_shift_example(self) -> None:
        self.assertIsInstance(build_example("shift"), ShiftSystem)
        self.assertEqual(build_shift_example().name, "shift")

    def test_unknown_names_and_bad_parameters(self) -> None:
        with self.assertRaises(ValueError):
            build_example("spiral")
        with self.assertRaises(ValueError):
            build_example("star")
        with self.assertRaises(ValueError):
            build_example("dendroid:3")

    def test_every_entry_has_usage(self) -> None:
        for name, entry in EXAMPLES.items():
            self.assertTrue(entry.usage.startswith(name))
            self.assertTrue(entry.summary)


class RandomStarTests(unittest.TestCase):
    """Validates seeded random monotone stars."""

    def test_same_seed_same_map(self) -> None:
        self.assertEqual(random_monotone_star(4, 4, 7), random_monotone_star(4, 4, 7))
        self.assertEqual(random_monotone_star(4, 4, 7).name, "random-star:4,4,7")

    def test_random_stars_are_monotone(self) -> None:
        for seed in range(25):
            f = random_monotone_star(3, 4, seed)
            self.assertEqual(check_monotone(f).outcome, Outcome.PASS, seed)

    def test_needs_a_beam(self) -> None:
        with self.assertRaises(MalformedMapError):
            random_monotone_star(0)


class DendroidTests(unittest.TestCase):
    """Validates the planar dendroid truncation."""

    def test_parameters_are_checked(self) -> None:
        with self.assertRaises(MalformedMapError):
            build_dendroid_example(1, 4)
        with self.assertRaises(MalformedMapError):
            build_dendroid_example(3, 0)

    def test_embedded_and_named(self) -> None:
        f = build_dendroid_example(3, 6)
        self.assertTrue(f.space.is_embedded)
        self.assertEqual(f.space.root, "T0")
        self.assertEqual(f.step(f.space.vertex_point("T1")), f.space.vertex_point("T0"))
        self.assertEqual(f.step(f.space.vertex_point("T-1")), f.space.vertex_point("J0"))

    def test_dendroid_resolution_is_smallest_dyadic_above_the_arc_gap(self) -> None:
        for k_arcs, gap in ((5, F(1, 27)), (12, F(1, 81)), (20, F(1, 729))):
            eps = dendroid_epsilon(k_arcs)
            self.assertGreaterEqual(eps, gap)
            self.assertLess(eps / 2, gap)
            self.assertEqual(eps.numerator, 1)
            self.assertEqual(eps.denominator.bit_count(), 1)
        self.assertEqual(dendroid_epsilon(12), F(1, 64))
        with self.assertRaises(MalformedMapError):
            dendroid_epsilon(2)
        self.assertEqual(default_epsilon(build_dendroid_example(8, 12)), F(1, 64))
        self.assertIsNone(default_epsilon(build_example("tent-tail")))
