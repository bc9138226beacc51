"""Unit tests for omega-, alpha-, branch and special alpha-limits."""

from __future__ import annotations

import unittest
from fractions import Fraction as F
from unittest.mock import patch

from dynamics.errors import EmptySetError, PolicyDeadEndError
from dynamics.examples import (
    build_collapsing_star,
    build_e616_star,
    build_infinite_star,
    build_star_map,
    build_tent_tail,
)
from dynamics.limits import (
    BranchPolicy,
    Budgets,
    LimitKind,
    PolicyRule,
    SetApprox,
    alpha_limit,
    alpha_union,
    branch_alpha_limit,
    check_invariance,
    check_minimality_transfer,
    extrapolate_branch,
    negative_orbit,
    omega_limit,
    special_alpha_limit_direct,
    special_alpha_limit_via_theorem,
    special_alpha_union,
)
from dynamics.space import FiniteSet, TreePoint, hausdorff_distance
from dynamics.systems import Outcome

EPS = F(1, 256)


def _dense_in_whole(space, points, eps) -> bool:
    grid = space.segment_net(space.whole(), eps / 4)
    to_points = space.nearest(points.points)
    return all(to_points(q) <= eps for q in grid)


class OmegaLimitTests(unittest.TestCase):
    """Validates forward limit sets."""

    def test_tent_tail_interior_goes_to_centre(self) -> None:
        f = build_tent_tail()
        approx = omega_limit(f, TreePoint("I1.0", F(3, 4)), EPS)
        self.assertTrue(approx.exact)
        self.assertEqual(approx.points.points, (f.space.vertex_point("z0"),))

    def test_star_endpoint_cycle(self) -> None:
        f = build_star_map(4)
        approx = omega_limit(f, f.space.vertex_point("z4.2"), EPS)
        self.assertEqual(len(approx.points), 4)
        self.assertTrue(approx.converged)

    def test_parameters_are_checked(self) -> None:
        with self.assertRaises(ValueError):
            omega_limit(build_tent_tail(), TreePoint("I1.0", F(1, 2)), F(0))
        with self.assertRaises(ValueError):
            omega_limit(build_tent_tail(), TreePoint("I1.0", F(1, 2)), EPS, 0, 0)


class AlphaLimitTests(unittest.TestCase):
    """Validates full backward limit sets."""

    def test_tent_tail_alpha_of_centre_fills_interval(self) -> None:
        f = build_tent_tail()
        approx = alpha_limit(f, f.space.vertex_point("z0"), EPS)
        self.assertTrue(approx.converged)
        self.assertTrue(_dense_in_whole(f.space, approx.points, EPS))

    def test_tent_tail_alpha_of_endpoint(self) -> None:
        f = build_tent_tail()
        end = f.space.vertex_point("z1.0")
        self.assertEqual(alpha_limit(f, end, EPS, 16).points.points, (end,))

    def test_star_alpha_of_centre_is_dense(self) -> None:
        f = build_star_map(3)
        approx = alpha_limit(f, f.space.vertex_point("z0"), EPS, 24)
        self.assertTrue(_dense_in_whole(f.space, approx.points, EPS))

    def test_point_outside_image_has_empty_alpha(self) -> None:
        approx = alpha_limit(build_collapsing_star(), TreePoint("A", F(3, 4)), EPS, 8)
        self.assertFalse(approx.points)
        self.assertFalse(approx.converged)
        self.assertIn("no preimage", approx.diagnostic)

    def test_alpha_union_needs_some_preimage(self) -> None:
        with self.assertRaises(EmptySetError):
            alpha_union(
                build_collapsing_star(), [TreePoint("A", F(3, 4))], Budgets(epsilon=EPS, depth=8)
            )

    def test_e616_beam_alphas(self) -> None:
        f = build_e616_star(10)
        for n in (1, 4, 10):
            end = f.space.vertex_point(f"z{n}")
            interior = alpha_limit(f, TreePoint(f"I{n}", F(1, 3)), EPS, 16)
            self.assertLessEqual(hausdorff_distance(interior.points, [end], f.space), EPS)
            self.assertEqual(alpha_limit(f, end, EPS, 16).points.points, (end,))
            self.assertEqual(omega_limit(f, end, EPS).points.points, (end,))
            omega = omega_limit(f, TreePoint(f"I{n}", F(1, 3)), EPS)
            self.assertEqual(omega.points.points, (f.space.vertex_point("z0"),))


class BranchTests(unittest.TestCase):
    """Validates negative orbits selected by policies."""

    def test_policy_parsing(self) -> None:
        self.assertEqual(BranchPolicy.parse("stay").rule, PolicyRule.STAY)
        self.assertEqual(BranchPolicy.parse("script:0,1"), BranchPolicy(PolicyRule.SCRIPT, (0, 1)))
        with self.assertRaises(ValueError):
            BranchPolicy.parse("script:")
        with self.assertRaises(ValueError):
            BranchPolicy.parse("random")

    def test_stay_branch_of_tent_tail_centre(self) -> None:
        f = build_tent_tail()
        centre = f.space.vertex_point("z0")
        approx = branch_alpha_limit(f, centre, "stay", EPS, 16)
        self.assertTrue(approx.exact)
        self.assertEqual(approx.points.points, (centre,))
        self.assertEqual(len(approx.negative_orbit), 17)

    def test_farthest_branch_runs_to_endpoint(self) -> None:
        f = build_tent_tail()
        approx = branch_alpha_limit(f, f.space.vertex_point("z0"), "farthest", EPS, 16)
        self.assertEqual(approx.points.points, (f.space.vertex_point("z1.0"),))

    def test_negative_orbit_maps_forward(self) -> None:
        f = build_star_map(3)
        chain = negative_orbit(f, f.space.vertex_point("z0"), BranchPolicy.parse("script:1,2"), 10)
        for later, earlier in zip(chain[1:], chain, strict=False):
            self.assertEqual(f.step(later), earlier)

    def test_dead_end_is_reported(self) -> None:
        with self.assertRaises(PolicyDeadEndError) as ctx:
            negative_orbit(
                build_collapsing_star(), TreePoint("A", F(3, 4)), BranchPolicy.parse("stay"), 4
            )
        self.assertEqual(ctx.exception.level, 1)


class SpecialAlphaTests(unittest.TestCase):
    """Validates special alpha-limits on the worked examples."""

    def test_tent_tail_centre_is_strictly_smaller_than_alpha(self) -> None:
        f = build_tent_tail()
        centre = f.space.vertex_point("z0")
        approx = special_alpha_limit_direct(f, centre, EPS, 20)
        self.assertEqual(set(approx.points), {centre, f.space.vertex_point("z1.0")})
        self.assertTrue(approx.exact)

    def test_via_theorem_agrees_on_tent_tail(self) -> None:
        f = build_tent_tail()
        centre = f.space.vertex_point("z0")
        direct = special_alpha_limit_direct(f, centre, EPS, 20)
        via = special_alpha_limit_via_theorem(f, centre, EPS, 20)
        self.assertLessEqual(hausdorff_distance(direct.points, via.points, f.space), 2 * EPS)

    def test_star_centre_sees_every_endpoint(self) -> None:
        for n in range(1, 6):
            f = build_star_map(n)
            centre = f.space.vertex_point("z0")
            expected = {centre} | {f.space.vertex_point(f"z{n}.{k}") for k in range(n)}
            approx = special_alpha_limit_direct(f, centre, EPS, 2 * n + 4)
            self.assertEqual(set(approx.points), expected, n)

    def test_e616_centre(self) -> None:
        f = build_e616_star(10)
        centre = f.space.vertex_point("z0")
        expected = {centre} | {f.space.vertex_point(f"z{n}") for n in range(1, 11)}
        self.assertEqual(set(special_alpha_limit_direct(f, centre, EPS, 12).points), expected)

    def test_infinite_star_centre_contains_every_period(self) -> None:
        f = build_infinite_star(10)
        centre = f.space.vertex_point("z0")
        found = set(special_alpha_limit_direct(f, centre, EPS, 24).points)
        for n in range(1, 11):
            self.assertTrue({f.space.vertex_point(f"z{n}.{k}") for k in range(n)} <= found, n)

    def test_union_over_tent_tail_grid(self) -> None:
        f = build_tent_tail()
        grid = [f.space.point("I1.0", F(k, 8)) for k in range(9)]
        union = special_alpha_union(f, grid, Budgets(epsilon=EPS, depth=12))
        self.assertEqual(set(union), {f.space.vertex_point("z0"), f.space.vertex_point("z1.0")})

    def test_backward_chain_is_extrapolated_to_its_cycle(self) -> None:
        f = build_tent_tail()
        chain = [f.space.vertex_point("z0")] + [
            TreePoint("I1.0", 1 - F(1, 2**n)) for n in range(1, 5)
        ]
        self.assertEqual(extrapolate_branch(f, chain), frozenset({f.space.vertex_point("z1.0")}))

    def test_chain_leaving_an_attracting_point_is_not_extrapolated(self) -> None:
        f = build_collapsing_star()
        chain = [TreePoint("A", F(1, 8)), TreePoint("A", F(1, 4)), TreePoint("A", F(1, 2))]
        chain.append(f.space.vertex_point("a"))
        self.assertIsNone(extrapolate_branch(f, chain))

    def test_shallow_star_centre_omits_transient_preimages(self) -> None:
        f = build_star_map(1)
        centre = f.space.vertex_point("z0")
        approx = special_alpha_limit_direct(f, centre, EPS, 6)
        self.assertEqual(set(approx.points), {centre, f.space.vertex_point("z1.0")})
        self.assertTrue(approx.exact)

    def test_point_without_preimage_has_exactly_empty_special_alpha(self) -> None:
        f = build_collapsing_star()
        approx = special_alpha_limit_direct(f, TreePoint("A", F(3, 4)), EPS, 8)
        self.assertFalse(approx.points)
        self.assertTrue(approx.exact)
        self.assertEqual(approx.diagnostic, "no preimage at level 1")

    def test_via_theorem_drops_wandering_points_next_to_a_repeller(self) -> None:
        f = build_tent_tail()
        ends = [f.space.vertex_point("z0"), f.space.vertex_point("z1.0")]
        via = special_alpha_limit_via_theorem(f, ends[0], EPS, 16)
        self.assertIn(ends[0], via.points)
        self.assertLessEqual(hausdorff_distance(via.points, ends, f.space), EPS)


class LimitInvariantTests(unittest.TestCase):
    """Validates invariance, containment and minimality transfer."""

    def test_omega_limits_are_invariant(self) -> None:
        for f, p in (
            (build_tent_tail(), TreePoint("I1.0", F(3, 4))),
            (build_star_map(4), build_star_map(4).space.vertex_point("z4.2")),
        ):
            approx = omega_limit(f, p, EPS)
            self.assertEqual(check_invariance(f, approx).outcome, Outcome.PASS, f.name)

    def test_moved_limit_set_is_not_invariant(self) -> None:
        f = build_tent_tail()
        moved = SetApprox(
            LimitKind.OMEGA, FiniteSet.of([TreePoint("I1.0", F(3, 4))]), EPS, 1, 1, True
        )
        verdict = check_invariance(f, moved)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertEqual(verdict.witness["image"], TreePoint("I1.0", F(1, 2)))

    def test_special_alpha_lies_in_alpha(self) -> None:
        for f in (build_tent_tail(), build_star_map(3), build_e616_star(4)):
            centre = f.space.vertex_point("z0")
            alpha = alpha_limit(f, centre, EPS, 16)
            to_alpha = f.space.nearest(alpha.points.points)
            for found in (
                special_alpha_limit_direct(f, centre, EPS, 16).points,
                special_alpha_limit_via_theorem(f, centre, EPS, 16).points,
            ):
                self.assertTrue(all(to_alpha(q) <= EPS for q in found), f.name)

    def test_cycling_omega_skips_minimality_transfer(self) -> None:
        f = build_tent_tail()
        verdict = check_minimality_transfer(
            f, TreePoint("I1.0", F(3, 4)), Budgets(epsilon=EPS, depth=16)
        )
        self.assertEqual(verdict.outcome, Outcome.INCONCLUSIVE)
        self.assertIn("skipped", verdict.witness)

    def test_infinite_omega_is_compared_with_alpha(self) -> None:
        f = build_tent_tail()
        end = f.space.vertex_point("z1.0")
        budgets = Budgets(epsilon=EPS, depth=16)
        middle = TreePoint("I1.0", F(1, 2))
        for omega_point, expected in ((end, Outcome.PASS), (middle, Outcome.FAIL)):
            spread = SetApprox(LimitKind.OMEGA, FiniteSet.of([omega_point]), EPS, 1, 1, True)
            with patch("dynamics.limits.omega_limit", return_value=spread):
                verdict = check_minimality_transfer(f, end, budgets)
            self.assertEqual(verdict.outcome, expected, omega_point)
