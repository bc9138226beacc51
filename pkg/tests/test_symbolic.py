"""Unit tests for the binary sequence space."""

from __future__ import annotations

import unittest
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from dynamics.errors import MalformedPointError
from dynamics.limits import omega_limit
from dynamics.symbolic import (
    SymbolicPoint,
    SymbolicSpace,
    cylinder_length,
    first_difference,
    k_formula,
    parse_symbolic_point,
    symbolic_distance,
    t_point,
    z_coordinate,
)
from dynamics.systems import ShiftSystem, shift_evaluate

Z = SymbolicPoint.shifted_z(0)


class SequenceFormTests(unittest.TestCase):
    """Validates the exact point forms and their coordinates."""

    def test_z_has_ones_at_triangular_positions(self) -> None:
        self.assertEqual(Z.prefix(10), (1, 0, 1, 0, 0, 1, 0, 0, 0, 1))
        self.assertEqual(z_coordinate(55), 1)
        self.assertEqual(z_coordinate(54), 0)

    def test_k_formula_places_n_zeros_before_a_one(self) -> None:
        for n in range(1, 51):
            k = k_formula(n)
            self.assertEqual(k, n * (n - 1) // 2 + n)
            shifted = SymbolicPoint.shifted_z(k)
            self.assertEqual(shifted.prefix(n + 1), (0,) * n + (1,))

    def test_t_points(self) -> None:
        self.assertEqual(t_point(0).prefix(4), (0, 0, 0, 0))
        self.assertEqual(t_point(3).prefix(4), (0, 0, 1, 0))
        self.assertEqual(t_point(-2).prefix(5), (0, 0, 1, 0, 1))

    def test_eventually_zero_strips_trailing_zeros(self) -> None:
        self.assertEqual(SymbolicPoint.eventually_zero((0, 1, 0, 0)), t_point(2))
        with self.assertRaises(MalformedPointError):
            SymbolicPoint.eventually_zero((0, 2))

    def test_shift_moves_between_forms(self) -> None:
        self.assertEqual(t_point(-1).shift(), Z)
        self.assertEqual(t_point(-3).shift(), t_point(-2))
        self.assertEqual(t_point(1).shift(), t_point(0))
        self.assertEqual(Z.shift(), SymbolicPoint.shifted_z(1))

    def test_parse_and_print_agree(self) -> None:
        for text in ("T0", "T3", "T-2", "Z", "Z+5", "EZ:0101"):
            self.assertEqual(str(parse_symbolic_point(text)), text)
        with self.assertRaises(MalformedPointError):
            parse_symbolic_point("Q7")


class SymbolicMetricTests(unittest.TestCase):
    """Validates the 2^-N metric and cylinder nets."""

    def test_distance_uses_first_difference(self) -> None:
        self.assertEqual(first_difference(t_point(1), Z), 3)
        self.assertEqual(symbolic_distance(t_point(1), Z), F(1, 8))
        self.assertEqual(symbolic_distance(Z, Z), 0)
        self.assertEqual(symbolic_distance(t_point(0), t_point(-1)), F(1, 4))

    def test_distinct_forms_of_different_sequences_are_apart(self) -> None:
        self.assertGreater(symbolic_distance(SymbolicPoint.shifted_z(10), t_point(0)), 0)

    def test_cylinder_length(self) -> None:
        self.assertEqual(cylinder_length(F(1, 8)), 3)
        self.assertEqual(cylinder_length(F(1, 10)), 4)
        self.assertEqual(cylinder_length(F(1)), 0)

    def test_epsilon_net_truncates(self) -> None:
        net = SymbolicSpace().epsilon_net([Z, SymbolicPoint.shifted_z(1)], F(1, 4))
        expected = (SymbolicPoint.eventually_zero((0, 1)), SymbolicPoint.eventually_zero((1,)))
        self.assertEqual(net.points, expected)

    @given(st.integers(min_value=0, max_value=60), st.integers(min_value=0, max_value=60))
    @settings(max_examples=100, deadline=None)
    def test_distance_is_symmetric_on_orbit_of_z(self, i: int, j: int) -> None:
        x, y = SymbolicPoint.shifted_z(i), SymbolicPoint.shifted_z(j)
        self.assertEqual(symbolic_distance(x, y), symbolic_distance(y, x))
        self.assertEqual(symbolic_distance(x, y) == 0, i == j)


class ShiftSystemTests(unittest.TestCase):
    """Validates the shift and the omega-limit of Z."""

    def test_shift_rejects_points_outside_carrier(self) -> None:
        with self.assertRaises(MalformedPointError):
            shift_evaluate(ShiftSystem(), SymbolicPoint.eventually_zero((1, 1)))

    def test_omega_of_z_is_the_t_points_at_each_resolution(self) -> None:
        system = ShiftSystem()
        for m in range(1, 13):
            approx = omega_limit(system, Z, F(1, 2**m), k_formula(m + 1), 2 * (m + 2))
            expected = {t_point(j) for j in range(m + 1)}
            self.assertEqual(set(approx.points), expected, m)

    def test_t_points_reach_the_fixed_point(self) -> None:
        approx = omega_limit(ShiftSystem(), t_point(4), F(1, 16), 0, 8)
        self.assertTrue(approx.exact)
        self.assertEqual(approx.points.points, (t_point(0),))
