"""Unit tests for piecewise-affine tree maps."""

from __future__ import annotations

import unittest
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from dynamics.errors import BudgetExceededError, MalformedMapError, MalformedPointError
from dynamics.examples import build_collapsing_star, build_full_tent, build_tent_tail
from dynamics.space import Segment, TreePoint, star_space
from dynamics.systems import (
    Outcome,
    PathRule,
    Piece,
    PwAffineTreeMap,
    backward_tree,
    check_monotone,
    core_space,
    evaluate,
    image_of_segment,
    iterate,
    orbit,
    parse_tree_point,
    preimage,
)


def _folding_map() -> PwAffineTreeMap:
    space = star_space([("A", "a", F(1)), ("B", "b", F(1))])
    rules = [
        PathRule("A", F(0), F(1), ("~A", "B"), F(2), F(0)),
        PathRule("B", F(0), F(1), ("A",), F(0), F(1)),
    ]
    return PwAffineTreeMap.from_rules(space, rules, "folding")


class EvaluationTests(unittest.TestCase):
    """Validates exact evaluation and iteration."""

    def setUp(self) -> None:
        self.f = build_tent_tail()
        self.space = self.f.space

    def test_tent_tail_values(self) -> None:
        self.assertEqual(evaluate(self.f, TreePoint("I1.0", F(3, 4))), TreePoint("I1.0", F(1, 2)))
        centre, end = self.space.vertex_point("z0"), self.space.vertex_point("z1.0")
        self.assertEqual(evaluate(self.f, TreePoint("I1.0", F(1, 4))), centre)
        self.assertEqual(evaluate(self.f, end), end)

    def test_iterate_and_orbit(self) -> None:
        start = TreePoint("I1.0", F(7, 8))
        self.assertEqual(iterate(self.f, start, 0), start)
        self.assertEqual(iterate(self.f, start, 2), TreePoint("I1.0", F(1, 2)))
        self.assertEqual(
            orbit(self.f, start, 4),
            [
                start,
                TreePoint("I1.0", F(3, 4)),
                TreePoint("I1.0", F(1, 2)),
                self.space.vertex_point("z0"),
            ],
        )

    def test_negative_iteration_count_raises(self) -> None:
        with self.assertRaises(ValueError):
            iterate(self.f, TreePoint("I1.0", F(1, 2)), -1)

    @given(st.fractions(min_value=0, max_value=1, max_denominator=256))
    @settings(max_examples=100, deadline=None)
    def test_tent_tail_matches_formula(self, t: F) -> None:
        image = evaluate(self.f, self.space.point("I1.0", t))
        self.assertEqual(image, self.space.point("I1.0", max(F(0), 2 * t - 1)))


class ConstructionTests(unittest.TestCase):
    """Validates map validation and path rules."""

    def test_path_rule_splits_at_edge_boundaries(self) -> None:
        f = _folding_map()
        self.assertEqual(
            f.pieces_on("A"),
            (
                Piece("A", F(0), F(1, 2), "A", F(-2), F(1)),
                Piece("A", F(1, 2), F(1), "B", F(2), F(-1)),
            ),
        )
        self.assertEqual(evaluate(f, TreePoint("A", F(1, 4))), TreePoint("A", F(1, 2)))
        self.assertEqual(evaluate(f, TreePoint("A", F(3, 4))), TreePoint("B", F(1, 2)))

    def test_rules_rebuild_the_same_map(self) -> None:
        f = build_tent_tail()
        self.assertEqual(PwAffineTreeMap.from_rules(f.space, f.rules()), f)

    def test_discontinuity_is_rejected(self) -> None:
        space = build_tent_tail().space
        pieces = [
            Piece("I1.0", F(0), F(1, 2), "I1.0", F(0), F(0)),
            Piece("I1.0", F(1, 2), F(1), "I1.0", F(1), F(0)),
        ]
        with self.assertRaises(MalformedMapError):
            PwAffineTreeMap.from_pieces(space, pieces)

    def test_gap_is_rejected(self) -> None:
        space = build_tent_tail().space
        with self.assertRaises(MalformedMapError):
            PwAffineTreeMap.from_pieces(space, [Piece("I1.0", F(0), F(1, 2), "I1.0", F(0), F(0))])

    def test_broken_target_path_is_rejected(self) -> None:
        space = star_space([("A", "a", F(1)), ("B", "b", F(1))])
        rules = [
            PathRule("A", F(0), F(1), ("A", "B"), F(2), F(0)),
            PathRule("B", F(0), F(1), ("A",), F(0), F(0)),
        ]
        with self.assertRaises(MalformedMapError):
            PwAffineTreeMap.from_rules(space, rules)

    def test_parse_tree_point_forms(self) -> None:
        space = build_tent_tail().space
        self.assertEqual(parse_tree_point(space, "I1.0:1/2"), TreePoint("I1.0", F(1, 2)))
        self.assertEqual(parse_tree_point(space, "z1.0"), space.vertex_point("z1.0"))
        self.assertEqual(parse_tree_point(space, "1/4"), TreePoint("I1.0", F(1, 4)))
        with self.assertRaises(MalformedPointError):
            parse_tree_point(space, "I1.0:x")


class PreimageTests(unittest.TestCase):
    """Validates preimages, backward trees and images."""

    def test_tent_tail_preimage_of_centre_is_an_interval(self) -> None:
        f = build_tent_tail()
        parts = preimage(f, f.space.vertex_point("z0"))
        self.assertEqual(len(parts), 1)
        self.assertEqual(parts[0].region.segments, (Segment("I1.0", F(0), F(1, 2)),))

    def test_full_tent_preimage_splits(self) -> None:
        f = build_full_tent()
        parts = preimage(f, TreePoint("I", F(1, 2)))
        self.assertEqual(
            [part.region.segments for part in parts],
            [(Segment("I", F(1, 4), F(1, 4)),), (Segment("I", F(3, 4), F(3, 4)),)],
        )

    def test_backward_tree_levels(self) -> None:
        f = build_tent_tail()
        tree = backward_tree(f, TreePoint("I1.0", F(1, 2)), 3)
        self.assertEqual(tree.depth, 3)
        self.assertEqual(tree.level(1)[0].region.segments, (Segment("I1.0", F(3, 4), F(3, 4)),))
        self.assertEqual(tree.level(3)[0].region.segments, (Segment("I1.0", F(15, 16), F(15, 16)),))

    def test_backward_tree_respects_component_cap(self) -> None:
        with self.assertRaises(BudgetExceededError) as ctx:
            backward_tree(build_full_tent(), TreePoint("I", F(1, 2)), 4, component_cap=4)
        self.assertEqual(ctx.exception.budget, "components")

    def test_image_of_segment(self) -> None:
        f = build_tent_tail()
        whole = Segment("I1.0", F(0), F(1))
        self.assertEqual(image_of_segment(f, whole).segments, (whole,))
        self.assertEqual(
            image_of_segment(f, Segment("I1.0", F(0), F(1, 2))).segments,
            (Segment("I1.0", F(0), F(0)),),
        )


class MonotoneAndCoreTests(unittest.TestCase):
    """Validates the monotonicity check and the core space."""

    def test_tent_tail_is_monotone(self) -> None:
        self.assertEqual(check_monotone(build_tent_tail()).outcome, Outcome.PASS)

    def test_full_tent_fails_with_split_preimage(self) -> None:
        verdict = check_monotone(build_full_tent())
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertEqual(verdict.witness["point"], TreePoint("I", F(1, 2)))
        params = [part.segments[0].lo for part in verdict.witness["components"]]
        self.assertEqual(params, [F(1, 4), F(3, 4)])

    def test_core_space_of_collapsing_star_shrinks(self) -> None:
        core = core_space(build_collapsing_star(), 3)
        self.assertEqual(core.region.segments, (Segment("A", F(0), F(1, 8)),))
        self.assertFalse(core.stabilized)

    def test_core_space_of_onto_map_is_whole_space(self) -> None:
        f = build_tent_tail()
        core = core_space(f, 5)
        self.assertTrue(core.stabilized)
        self.assertEqual(core.region, f.space.whole())
