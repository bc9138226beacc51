"""Point classification: periodic, almost periodic, recurrent, nonwandering.

Every verdict that quantifies over all times is decided inside a budget and
says so through ``Verdict.budget_relative``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from fractions import Fraction
from functools import lru_cache
from typing import Any

from dynamics.limits import Budgets, SetApprox, omega_limit
from dynamics.periodic import PeriodicOrbit, minimal_period, periodic_points
from dynamics.space import FiniteSet, TreePoint, hausdorff_distance
from dynamics.systems import (
    DynamicalSystem,
    Outcome,
    PwAffineTreeMap,
    Verdict,
    image_of_segments,
    orbit,
)

logger = logging.getLogger(__name__)

__all__ = [
    "PeriodicOrbit",
    "Verdict",
    "basin",
    "cached_nonwandering",
    "check_weak_incompressibility",
    "classify_point",
    "is_almost_periodic",
    "is_minimal",
    "is_nonwandering",
    "is_periodic",
    "is_recurrent",
    "nonwandering_set",
    "periodic_points",
    "recurrent_set",
]


def is_periodic(f: PwAffineTreeMap, p: TreePoint, max_period: int) -> Verdict:
    q = f.space.normalize(p)
    period = minimal_period(f, q, max_period)
    parameters = {"max_period": max_period}
    if period is None:
        return Verdict("periodic", q, Outcome.FAIL, {"max_period": max_period}, parameters, True)
    return Verdict("periodic", q, Outcome.PASS, {"period": period}, parameters)


def is_recurrent(
    f: DynamicalSystem[Any], p: Any, eps: Fraction, budgets: Budgets | None = None
) -> Verdict:
    """PASS when ``p`` lies within ``eps`` of its omega-limit approximation."""
    limits = budgets or Budgets.from_settings()
    start = f.space.normalize(p) if isinstance(f, PwAffineTreeMap) else p
    omega = omega_limit(f, start, eps, limits.transient, limits.window)
    gap = f.space.nearest(omega.points.points)(start)
    parameters = {"epsilon": eps, "transient": limits.transient, "window": limits.window}
    if gap > eps:
        return Verdict(
            "recurrent", start, Outcome.FAIL, {"distance": gap}, parameters, not omega.exact
        )
    points = orbit(f, start, limits.transient + 2 * limits.window + 1)
    for n, q in enumerate(points[1:], start=1):
        if f.space.distance(start, q) <= eps:
            return Verdict(
                "recurrent", start, Outcome.PASS, {"return_time": n, "distance": gap}, parameters
            )
    return Verdict("recurrent", start, Outcome.INCONCLUSIVE, {"distance": gap}, parameters, True)


def is_nonwandering(
    f: PwAffineTreeMap, p: TreePoint, eps: Fraction, time_budget: int | None = None
) -> Verdict:
    """Exact return test of the ball U = B(p, eps) under images f^n(U).

    When the image sequence revisits an earlier set without ever meeting U,
    it cycles forever, so that FAIL is certified rather than budget-relative.
    """
    budget = time_budget if time_budget is not None else Budgets.from_settings().time_budget
    space = f.space
    q = space.normalize(p)
    region = space.ball(q, eps).region
    parameters = {"epsilon": eps, "time_budget": budget}
    seen = {region: 0}
    current = region
    for n in range(1, budget + 1):
        current = image_of_segments(f, current)
        if space.intersects(current, region):
            return Verdict("nonwandering", q, Outcome.PASS, {"return_time": n}, parameters)
        if current in seen:
            witness = {"cycle_start": seen[current], "cycle_length": n - seen[current]}
            return Verdict("nonwandering", q, Outcome.FAIL, witness, parameters)
        seen[current] = n
    logger.debug("No return of B(%s, %s) within %s steps", q, eps, budget)
    return Verdict("nonwandering", q, Outcome.FAIL, {"budget": budget}, parameters, True)


@lru_cache(maxsize=8192)
def cached_nonwandering(
    f: PwAffineTreeMap, p: TreePoint, eps: Fraction, time_budget: int
) -> Verdict:
    return is_nonwandering(f, p, eps, time_budget)


def is_almost_periodic(
    f: DynamicalSystem[Any],
    p: Any,
    eps: Fraction,
    n_budget: int,
    k_budget: int,
) -> Verdict:
    """Smallest N such that each window f^k..f^(k+N), k <= k_budget, meets B(p, eps)."""
    start = f.space.normalize(p) if isinstance(f, PwAffineTreeMap) else p
    points = orbit(f, start, k_budget + n_budget + 1)
    returns = [i for i, q in enumerate(points) if f.space.distance(start, q) <= eps]
    parameters = {"epsilon": eps, "n_budget": n_budget, "k_budget": k_budget}
    gap = 0
    index = 0
    for k in range(k_budget + 1):
        while index < len(returns) and returns[index] < k:
            index += 1
        if index == len(returns):
            return Verdict(
                "almost_periodic", start, Outcome.FAIL, {"window_start": k}, parameters, True
            )
        gap = max(gap, returns[index] - k)
        if gap > n_budget:
            return Verdict(
                "almost_periodic", start, Outcome.FAIL, {"window_start": k}, parameters, True
            )
    return Verdict(
        "almost_periodic", start, Outcome.PASS, {"syndetic_gap": gap}, parameters, True
    )


def is_minimal(
    f: DynamicalSystem[Any], s: Iterable[Any], eps: Fraction, time_budget: int | None = None
) -> Verdict:
    """Every orbit started in ``s`` must pass within ``eps`` of every point of ``s``."""
    members = FiniteSet.of(s)
    budget = time_budget if time_budget is not None else Budgets.from_settings().time_budget
    parameters = {"epsilon": eps, "time_budget": budget}
    for start in members:
        visits = f.space.nearest(orbit(f, start, budget + 1))
        for target in members:
            if visits(target) > eps:
                witness = {"from": start, "missed": target}
                return Verdict("minimal", members, Outcome.FAIL, witness, parameters, True)
    return Verdict("minimal", members, Outcome.PASS, {"size": len(members)}, parameters)


def _target_points(target: PeriodicOrbit | SetApprox | Iterable[Any]) -> tuple[Any, ...]:
    if isinstance(target, PeriodicOrbit):
        return target.points
    if isinstance(target, SetApprox):
        return target.points.points
    return tuple(target)


def basin(
    f: DynamicalSystem[Any],
    target: PeriodicOrbit | SetApprox | Iterable[Any],
    grid: Iterable[Any],
    eps: Fraction,
    budgets: Budgets | None = None,
) -> FiniteSet[Any]:
    """Grid points whose omega-limit lies within ``eps`` of ``target`` (Hausdorff)."""
    limits = budgets or Budgets.from_settings()
    wanted = _target_points(target)
    found = []
    for p in grid:
        omega = omega_limit(f, p, eps, limits.transient, limits.window)
        if hausdorff_distance(omega.points, wanted, f.space) <= eps:
            found.append(p)
    return FiniteSet.of(found)


def check_weak_incompressibility(
    f: DynamicalSystem[Any], a: Iterable[Any], proper: Iterable[Any], eps: Fraction
) -> Verdict:
    """PASS when some image of a point of ``a`` outside ``proper`` is eps-close to ``proper``."""
    members = FiniteSet.of(a)
    subset = FiniteSet.of(proper)
    if not subset or not set(subset) < set(members):
        raise ValueError("F must be a non-empty proper subset of A")
    rest = [p for p in members if p not in subset]
    to_subset = f.space.nearest(subset.points)
    parameters = {"epsilon": eps}
    for p in rest:
        image = f.step(p)
        if to_subset(image) <= eps:
            return Verdict(
                "weak_incompressibility", members, Outcome.PASS, {"point": p}, parameters
            )
    return Verdict(
        "weak_incompressibility", members, Outcome.FAIL, {"outside": tuple(rest)}, parameters
    )


def nonwandering_set(
    f: PwAffineTreeMap, grid: Iterable[TreePoint], eps: Fraction, time_budget: int | None = None
) -> FiniteSet[TreePoint]:
    return FiniteSet.of(p for p in grid if is_nonwandering(f, p, eps, time_budget).passed)


def recurrent_set(
    f: PwAffineTreeMap, grid: Iterable[TreePoint], eps: Fraction, budgets: Budgets | None = None
) -> FiniteSet[TreePoint]:
    return FiniteSet.of(p for p in grid if is_recurrent(f, p, eps, budgets).passed)


def classify_point(
    f: PwAffineTreeMap, p: TreePoint, budgets: Budgets | None = None
) -> list[Verdict]:
    """All four point classes at the budget's resolution."""
    limits = budgets or Budgets.from_settings()
    eps = limits.epsilon
    return [
        is_periodic(f, p, limits.max_period),
        is_almost_periodic(f, p, eps, limits.window, limits.transient + limits.window),
        is_recurrent(f, p, eps, limits),
        is_nonwandering(f, p, eps, limits.time_budget),
    ]
