"""Finite approximations of omega-, alpha-, branch alpha- and special alpha-limit sets.

Every approximation is returned as a ``SetApprox`` tagged with its resolution,
the depth or window that produced it and whether doubling that budget moved
the answer by more than the resolution.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
from typing import Any

import networkx as nx

from config import settings
from dynamics.errors import BudgetExceededError, EmptySetError, PolicyDeadEndError
from dynamics.space import FiniteSet, SubtreeSet, TreePoint, TreeSpace, hausdorff_distance
from dynamics.systems import (
    BackwardTree,
    DynamicalSystem,
    Outcome,
    PwAffineTreeMap,
    Verdict,
    backward_tree,
    iterate,
    orbit,
    preimage,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Budgets:
    """Numeric limits shared by limit, classification and verification code."""

    epsilon: Fraction = settings.DEFAULT_EPSILON
    depth: int = settings.DEFAULT_DEPTH
    window: int = settings.DEFAULT_WINDOW
    transient: int = settings.DEFAULT_TRANSIENT
    time_budget: int = settings.DEFAULT_TIME_BUDGET
    component_cap: int = settings.COMPONENT_CAP
    chain_cap: int = settings.CHAIN_CAP
    max_period: int = settings.DEFAULT_MAX_PERIOD

    @classmethod
    def from_settings(cls) -> Budgets:
        return cls()


class LimitKind(StrEnum):
    OMEGA = "omega"
    ALPHA = "alpha"
    BRANCH_ALPHA = "branch_alpha"
    SPECIAL_ALPHA = "special_alpha"
    SPECIAL_ALPHA_VIA_THEOREM = "special_alpha_via_theorem"


@dataclass(frozen=True)
class SetApprox:
    kind: LimitKind
    points: FiniteSet[Any]
    resolution: Fraction
    depth: int
    budget: int
    converged: bool
    exact: bool = False
    segments: SubtreeSet | None = None
    negative_orbit: tuple[Any, ...] = field(default=())
    diagnostic: str = ""


class PolicyRule(StrEnum):
    STAY = "stay"
    LEFTMOST = "leftmost"
    FARTHEST = "farthest"
    SCRIPT = "script"


@dataclass(frozen=True)
class BranchPolicy:
    """Rule choosing one preimage representative per level of a negative orbit."""

    rule: PolicyRule
    script: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> BranchPolicy:
        raw = text.strip().lower()
        if raw.startswith("script:"):
            indices = tuple(int(item) for item in raw[len("script:") :].split(",") if item)
            if not indices or any(index < 0 for index in indices):
                raise ValueError("script policy needs non-negative indices")
            return cls(PolicyRule.SCRIPT, indices)
        return cls(PolicyRule(raw))

    def choose(
        self, space: TreeSpace, level: int, current: TreePoint, candidates: Sequence[TreePoint]
    ) -> TreePoint:
        if self.rule is PolicyRule.STAY:
            if current in candidates:
                return current
            return min(candidates, key=lambda c: (space.distance(current, c), c))
        if self.rule is PolicyRule.LEFTMOST:
            return candidates[0]
        if self.rule is PolicyRule.FARTHEST:
            root = space.vertex_point(space.root)
            return max(candidates, key=lambda c: space.distance(root, c))
        index = self.script[level % len(self.script)]
        return candidates[index % len(candidates)]


def _start(f: DynamicalSystem[Any], p: Any) -> Any:
    return f.space.normalize(p) if isinstance(f, PwAffineTreeMap) else p


def _agree(space: Any, first: FiniteSet[Any], second: FiniteSet[Any], eps: Fraction) -> bool:
    if not first and not second:
        return True
    if not first or not second:
        return False
    return hausdorff_distance(first, second, space) <= eps


# -- omega --------------------------------------------------------------------------


def omega_limit(
    f: DynamicalSystem[Any],
    p: Any,
    eps: Fraction | None = None,
    transient: int | None = None,
    window: int | None = None,
) -> SetApprox:
    """epsilon-net of the orbit window ``[transient, transient + window)``.

    An orbit that revisits a point is eventually periodic, and then the exact
    cycle is returned instead.
    """
    resolution = eps if eps is not None else settings.DEFAULT_EPSILON
    skip = transient if transient is not None else settings.DEFAULT_TRANSIENT
    width = window if window is not None else settings.DEFAULT_WINDOW
    if resolution <= 0 or width < 1 or skip < 0:
        raise ValueError("omega_limit needs eps > 0, window >= 1 and transient >= 0")
    horizon = skip + 2 * width
    seen: dict[Any, int] = {}
    points: list[Any] = []
    current = _start(f, p)
    for k in range(horizon):
        if current in seen:
            cycle = points[seen[current] :]
            logger.debug(
                "Orbit of %s enters a %s-cycle after %s steps", p, len(cycle), seen[current]
            )
            return SetApprox(
                LimitKind.OMEGA, FiniteSet.of(cycle), resolution, k, horizon, True, exact=True
            )
        seen[current] = k
        points.append(current)
        current = f.step(current)
    first = f.space.epsilon_net(points[skip : skip + width], resolution)
    second = f.space.epsilon_net(points[skip + width :], resolution)
    converged = _agree(f.space, first, second, resolution)
    return SetApprox(LimitKind.OMEGA, first, resolution, skip + width, horizon, converged)


# -- alpha --------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _tail_region(f: PwAffineTreeMap, p: TreePoint, depth: int, cap: int) -> tuple[SubtreeSet, str]:
    tree = backward_tree(f, p, depth, cap)
    segments = []
    for n in range(depth // 2, depth + 1):
        level = tree.level(n)
        if not level:
            return SubtreeSet(), f"no preimage at level {n}"
        segments.extend(seg for comp in level for seg in comp.region)
    return f.space.subtree(segments), ""


def alpha_limit(
    f: PwAffineTreeMap,
    p: TreePoint,
    eps: Fraction | None = None,
    depth: int | None = None,
    component_cap: int | None = None,
) -> SetApprox:
    """epsilon-net of the preimage components at levels ``[depth/2, depth]``."""
    resolution = eps if eps is not None else settings.DEFAULT_EPSILON
    levels = depth if depth is not None else settings.DEFAULT_DEPTH
    cap = component_cap if component_cap is not None else settings.COMPONENT_CAP
    region, diagnostic = _tail_region(f, p, levels, cap)
    if not region:
        return SetApprox(
            LimitKind.ALPHA, FiniteSet(), resolution, levels, cap, False, diagnostic=diagnostic
        )
    points = f.space.segment_net(region, resolution)
    try:
        deeper, _ = _tail_region(f, p, 2 * levels, cap)
    except BudgetExceededError as exc:
        logger.warning("alpha refinement of %s stopped: %s", p, exc)
        return SetApprox(
            LimitKind.ALPHA, points, resolution, levels, cap, False, segments=region,
            diagnostic=str(exc),
        )
    converged = bool(deeper) and _agree(
        f.space, points, f.space.segment_net(deeper, resolution), resolution
    )
    return SetApprox(LimitKind.ALPHA, points, resolution, levels, cap, converged, segments=region)


# -- branches -----------------------------------------------------------------------


def representatives(
    f: PwAffineTreeMap, region: SubtreeSet, extra: Iterable[TreePoint] = ()
) -> list[TreePoint]:
    """Segment endpoints, breakpoints of ``f`` and ``extra`` points lying in ``region``."""
    space = f.space
    found = set(space.endpoints(region))
    for point in (*f.breakpoints(), *extra):
        if space.contains(region, point):
            found.add(point)
    return sorted(found)


def extrapolate_branch(
    f: PwAffineTreeMap, chain: Sequence[TreePoint]
) -> frozenset[TreePoint] | None:
    """Exact limit cycle of a negative orbit whose piece itinerary is periodic.

    ``chain[n+1]`` is a preimage of ``chain[n]``. When the last ``2m`` pieces
    repeat with period ``m``, the composed branch of f^m is ``t -> a*t + b``.
    Its fixed point is accepted when it is a true period-m point and either
    the chain already sits on it, or ``|a| > 1`` and the chain moved closer to
    it over the last period. Repeating the itinerary then continues the chain
    inside the branch domain and contracts it onto the cycle.
    """
    depth = len(chain) - 1
    if depth < 2:
        return None
    space = f.space
    steps = [f.piece_at(chain[n]) for n in range(1, depth + 1)]
    for m in range(1, depth // 2 + 1):
        tail = steps[depth - 2 * m :]
        if tail[:m] != tail[m:]:
            continue
        home = steps[-1].edge
        edge, a, b = home, Fraction(1), Fraction(0)
        valid = True
        for piece in reversed(steps[depth - m :]):
            if piece.edge != edge:
                valid = False
                break
            a, b = piece.a * a, piece.a * b + piece.b
            edge = piece.target
        if not valid or edge != home or a == 1:
            continue
        t = b / (1 - a)
        if not steps[-1].lo <= t <= steps[-1].hi:
            continue
        fixed = space.point(home, t)
        if iterate(f, fixed, m) != fixed:
            continue
        last = space.distance(fixed, chain[-1])
        before = space.distance(fixed, chain[-1 - m])
        if last != 0 and not (abs(a) > 1 and last < before):
            continue
        logger.debug("Branch itinerary has period %s; limit cycle through %s", m, fixed)
        return frozenset(orbit(f, fixed, m))
    return None


def _branch_limit(
    f: PwAffineTreeMap, chain: Sequence[TreePoint]
) -> tuple[frozenset[TreePoint], bool]:
    cycle = extrapolate_branch(f, chain)
    if cycle is not None:
        return cycle, True
    return frozenset(chain[len(chain) // 2 :]), False


def negative_orbit(
    f: PwAffineTreeMap, p: TreePoint, policy: BranchPolicy, depth: int
) -> list[TreePoint]:
    """``[x_0 = p, x_1, ..., x_depth]`` with ``f(x_{n+1}) = x_n`` chosen by ``policy``."""
    space = f.space
    chain = [space.normalize(p)]
    for n in range(depth):
        parts = preimage(f, chain[-1])
        if not parts:
            raise PolicyDeadEndError(n + 1, chain[-1])
        candidates = sorted({c for part in parts for c in representatives(f, part.region)})
        chain.append(policy.choose(space, n, chain[-1], candidates))
    return chain


def branch_alpha_limit(
    f: PwAffineTreeMap,
    p: TreePoint,
    policy: BranchPolicy | str,
    eps: Fraction | None = None,
    depth: int | None = None,
) -> SetApprox:
    """alpha-limit of one negative orbit selected by ``policy``.

    A periodic itinerary yields the exact limit cycle; otherwise the tail
    half of the orbit stands in for it and ``exact`` stays False.
    """
    rule = BranchPolicy.parse(policy) if isinstance(policy, str) else policy
    resolution = eps if eps is not None else settings.DEFAULT_EPSILON
    levels = depth if depth is not None else settings.DEFAULT_DEPTH
    chain = negative_orbit(f, p, rule, 2 * levels)
    shallow, exact = _branch_limit(f, chain[: levels + 1])
    deep, _ = _branch_limit(f, chain)
    points = f.space.epsilon_net(shallow, resolution)
    converged = _agree(f.space, points, f.space.epsilon_net(deep, resolution), resolution)
    return SetApprox(
        LimitKind.BRANCH_ALPHA,
        points,
        resolution,
        levels,
        levels,
        converged,
        exact=exact,
        negative_orbit=tuple(chain[: levels + 1]),
    )


# -- special alpha ------------------------------------------------------------------


@dataclass
class _BranchGraph:
    graph: nx.DiGraph
    level: dict[TreePoint, int]
    parent: dict[TreePoint, TreePoint | None]

    def chain(self, node: TreePoint) -> list[TreePoint]:
        path = [node]
        while (above := self.parent[path[-1]]) is not None:
            path.append(above)
        return path[::-1]


def _explore_branches(
    f: PwAffineTreeMap, tree: BackwardTree, budget: int
) -> _BranchGraph:
    """Representative negative orbits, level by level inside the backward tree.

    The children of ``x`` are the representatives of each component of
    ``f^-1(x)``, together with ``x`` itself or the root when they lie in that
    component, so a branch may stay put or close a loop.
    """
    root = tree.root
    depth = tree.depth
    graph = nx.DiGraph()
    graph.add_node(root)
    level: dict[TreePoint, int] = {root: 0}
    parent: dict[TreePoint, TreePoint | None] = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        if level[x] >= depth:
            continue
        for part in preimage(f, x):
            for rep in representatives(f, part.region, (x, root)):
                graph.add_edge(x, rep)
                if rep in level:
                    continue
                level[rep] = level[x] + 1
                parent[rep] = x
                queue.append(rep)
                if len(level) > budget:
                    logger.warning("Branch enumeration from %s exceeded %s nodes", root, budget)
                    raise BudgetExceededError("branches", budget, f"from {root}")
    return _BranchGraph(graph, level, parent)


def _special_points(
    f: PwAffineTreeMap, branches: _BranchGraph, depth: int
) -> tuple[set[TreePoint], int]:
    """Points on backward loops plus limit cycles of branches reaching ``depth``.

    Returns the points and the number of deep branches whose itinerary did not
    settle; those contribute nothing.
    """
    nodes = [x for x, n in branches.level.items() if n <= depth]
    sub = branches.graph.subgraph(nodes)
    found: set[TreePoint] = set()
    for component in nx.strongly_connected_components(sub):
        if len(component) > 1 or any(sub.has_edge(x, x) for x in component):
            found.update(component)
    unsettled = 0
    for x in nodes:
        if branches.level[x] != depth:
            continue
        cycle = extrapolate_branch(f, branches.chain(x))
        if cycle is None:
            unsettled += 1
        else:
            found.update(cycle)
    return found, unsettled


def special_alpha_limit_direct(
    f: PwAffineTreeMap,
    p: TreePoint,
    eps: Fraction | None = None,
    depth: int | None = None,
    branch_budget: int | None = None,
    budgets: Budgets | None = None,
) -> SetApprox:
    """Union of branch alpha-limits over every representative negative orbit.

    Branches follow exact point preimages inside the backward tree of ``p``.
    Backward loops contribute their points and branches reaching full depth
    contribute the limit cycles of their itineraries. A branch that has not
    settled contributes nothing and clears ``exact``.
    """
    limits = budgets or Budgets.from_settings()
    resolution = eps if eps is not None else limits.epsilon
    levels = depth if depth is not None else limits.depth
    budget = branch_budget if branch_budget is not None else limits.component_cap
    root = f.space.normalize(p)
    tree = backward_tree(f, root, 2 * levels, budget)
    dead = next((n for n in range(1, tree.depth + 1) if not tree.level(n)), None)
    if dead is not None:
        logger.debug("No negative orbit of %s: backward tree dies at level %s", root, dead)
        return SetApprox(
            LimitKind.SPECIAL_ALPHA,
            FiniteSet(),
            resolution,
            levels,
            budget,
            True,
            exact=True,
            diagnostic=f"no preimage at level {dead}",
        )
    branches = _explore_branches(f, tree, budget)
    shallow, unsettled = _special_points(f, branches, levels)
    deep, _ = _special_points(f, branches, 2 * levels)
    points = f.space.epsilon_net(shallow, resolution)
    converged = _agree(f.space, points, f.space.epsilon_net(deep, resolution), resolution)
    diagnostic = ""
    if unsettled:
        diagnostic = f"{unsettled} branches at depth {levels} did not settle on a cycle"
    elif not points:
        diagnostic = "no negative orbit reaches the requested depth"
    return SetApprox(
        LimitKind.SPECIAL_ALPHA,
        points,
        resolution,
        levels,
        budget,
        converged,
        exact=not unsettled and bool(points),
        diagnostic=diagnostic,
    )


def _near_own_alpha(f: PwAffineTreeMap, q: TreePoint, eps: Fraction, depth: int, cap: int) -> bool:
    region, _ = _tail_region(f, q, depth, cap)
    return bool(region) and f.space.distance_to_subtree(q, region) <= eps


def special_alpha_limit_via_theorem(
    f: PwAffineTreeMap,
    p: TreePoint,
    eps: Fraction | None = None,
    depth: int | None = None,
    budgets: Budgets | None = None,
) -> SetApprox:
    """alpha-limit points that are nonwandering at resolution ``eps``.

    A point passes when the ball B(q, eps) returns under f and q lies within
    eps of its own alpha-limit tail (``q`` in alpha(q) characterizes the
    nonwandering points of a monotone map). The ball test alone also admits
    wandering points up to (slope + 1) * eps from an expanding periodic point.
    """
    # classify builds on this module, so the import stays local.
    from dynamics.classify import cached_nonwandering

    limits = budgets or Budgets.from_settings()
    resolution = eps if eps is not None else limits.epsilon
    levels = depth if depth is not None else limits.depth
    alpha = alpha_limit(f, p, resolution, levels, limits.component_cap)
    if not alpha.points:
        return SetApprox(
            LimitKind.SPECIAL_ALPHA_VIA_THEOREM,
            FiniteSet(),
            resolution,
            levels,
            limits.time_budget,
            alpha.converged,
            diagnostic=alpha.diagnostic,
        )
    kept = [
        q
        for q in alpha.points
        if cached_nonwandering(f, q, resolution, limits.time_budget).passed
        and _near_own_alpha(f, q, resolution, levels, limits.component_cap)
    ]
    return SetApprox(
        LimitKind.SPECIAL_ALPHA_VIA_THEOREM,
        f.space.epsilon_net(kept, resolution),
        resolution,
        levels,
        limits.time_budget,
        alpha.converged,
    )


@lru_cache(maxsize=4096)
def cached_special_alpha(f: PwAffineTreeMap, p: TreePoint, budgets: Budgets) -> SetApprox:
    """``special_alpha_limit_direct`` memoized for suites that revisit samples."""
    return special_alpha_limit_direct(f, p, budgets=budgets)


@lru_cache(maxsize=4096)
def cached_alpha(f: PwAffineTreeMap, p: TreePoint, budgets: Budgets) -> SetApprox:
    return alpha_limit(f, p, budgets.epsilon, budgets.depth, budgets.component_cap)


def special_alpha_union(
    f: PwAffineTreeMap, points: Iterable[TreePoint], budgets: Budgets | None = None
) -> FiniteSet[TreePoint]:
    """epsilon-net of the union of special alpha-limits over ``points`` (SA(f))."""
    limits = budgets or Budgets.from_settings()
    found: set[TreePoint] = set()
    for p in points:
        found.update(cached_special_alpha(f, f.space.normalize(p), limits).points)
    return f.space.epsilon_net(found, limits.epsilon)


def alpha_union(
    f: PwAffineTreeMap, points: Iterable[TreePoint], budgets: Budgets | None = None
) -> FiniteSet[TreePoint]:
    """epsilon-net of the union of alpha-limits over ``points`` (A(f))."""
    limits = budgets or Budgets.from_settings()
    found: set[TreePoint] = set()
    for p in points:
        found.update(cached_alpha(f, f.space.normalize(p), limits).points)
    if not found:
        raise EmptySetError("no sampled point has a non-empty alpha-limit")
    return f.space.epsilon_net(found, limits.epsilon)


# -- invariants ---------------------------------------------------------------------


def check_invariance(f: DynamicalSystem[Any], approx: SetApprox) -> Verdict:
    """Every image of a point of a converged limit set lies within its resolution."""
    parameters = {"kind": approx.kind.value, "epsilon": approx.resolution}
    if not approx.converged or not approx.points:
        return Verdict("invariance", approx.kind.value, Outcome.INCONCLUSIVE, {}, parameters, True)
    to_set = f.space.nearest(approx.points.points)
    for q in approx.points:
        image = f.step(q)
        gap = to_set(image)
        if gap > approx.resolution:
            witness = {"point": q, "image": image, "distance": gap}
            return Verdict("invariance", approx.kind.value, Outcome.FAIL, witness, parameters)
    return Verdict("invariance", approx.kind.value, Outcome.PASS, {}, parameters)


def check_minimality_transfer(
    f: PwAffineTreeMap, p: TreePoint, budgets: Budgets | None = None
) -> Verdict:
    """An infinite omega-limit equals the alpha-limit, compared at 2 eps.

    A finite (exactly cycling) omega-limit leaves nothing to compare; the
    verdict is then INCONCLUSIVE with ``skipped`` in its witness.
    """
    limits = budgets or Budgets.from_settings()
    eps = limits.epsilon
    q = f.space.normalize(p)
    parameters = {"epsilon": eps, "window": limits.window, "depth": limits.depth}
    omega = omega_limit(f, q, eps, limits.transient, limits.window)
    if omega.exact:
        witness = {"skipped": f"omega is a cycle of {len(omega.points)} points"}
        return Verdict("minimality_transfer", q, Outcome.INCONCLUSIVE, witness, parameters, True)
    alpha = alpha_limit(f, q, eps, limits.depth, limits.component_cap)
    if not alpha.points:
        return Verdict(
            "minimality_transfer", q, Outcome.FAIL, {"alpha": "empty"}, parameters, True
        )
    gap = hausdorff_distance(omega.points, alpha.points, f.space)
    outcome = Outcome.PASS if gap <= 2 * eps else Outcome.FAIL
    return Verdict("minimality_transfer", q, outcome, {"distance": gap}, parameters, True)
