"""Command-line front end for limit sets, classification and theorem suites."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from datetime import UTC, datetime
from fractions import Fraction
from pathlib import Path
from typing import Any

from config.settings import APP_LOG_FORMAT, APP_LOG_LEVEL, validate_runtime_environment
from dynamics.classify import classify_point
from dynamics.description import build_system, load_system
from dynamics.errors import BudgetExceededError, LimitLabError
from dynamics.examples import EXAMPLES, build_example, default_epsilon
from dynamics.limits import (
    Budgets,
    BranchPolicy,
    SetApprox,
    alpha_limit,
    branch_alpha_limit,
    omega_limit,
    special_alpha_limit_direct,
)
from dynamics.report import (
    encode_set_approx,
    encode_suite,
    encode_verdict,
    envelope,
    write_json,
    write_points_csv,
)
from dynamics.space import sample_grid
from dynamics.symbolic import SymbolicPoint, parse_symbolic_point
from dynamics.systems import PwAffineTreeMap, ShiftSystem, format_tree_point, parse_tree_point
from dynamics.verify import SUITES, SuiteStatus, render_table, run_suite, suite_budgets

logger = logging.getLogger(__name__)
_LOGGING_CONFIGURED = False

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class _JsonFormatter(logging.Formatter):
    """Minimal JSON log formatter for production-friendly logs."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False)


def _configure_logging() -> None:
    """Configure root logger once; logs go to stderr so stdout stays clean."""
    global _LOGGING_CONFIGURED
    root = logging.getLogger()
    if _LOGGING_CONFIGURED:
        return

    handler = logging.StreamHandler(sys.stderr)
    if APP_LOG_FORMAT == "json":
        handler.setFormatter(_JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s [%(levelname)s] %(message)s"))

    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(getattr(logging, APP_LOG_LEVEL, logging.INFO))
    _LOGGING_CONFIGURED = True


class _UsageError(LimitLabError):
    pass


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational p/q: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_system_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--example", help="example NAME[:params]; see 'examples list'")
    source.add_argument("--system", type=Path, help="system description file")
    parser.add_argument("--seed", type=int, help="seed for randomized fixtures")
    parser.add_argument("--epsilon", type=_rational, help="resolution P/Q")
    parser.add_argument("--depth", type=int, help="backward depth / limit-set depth")
    parser.add_argument("--budget", type=int, help="time budget and per-level component cap")
    parser.add_argument("--json", type=Path, dest="json_path", help="write a JSON report")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limitlab", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    limits = commands.add_parser("limits", help="compute a limit set of one point")
    _add_system_flags(limits)
    limits.add_argument("--point", help="EDGE:P/Q, a vertex id, or a symbolic point")
    limits.add_argument("--kind", choices=("omega", "alpha", "salpha", "branch"), default="omega")
    limits.add_argument(
        "--policy", default="stay", help="branch policy: stay|leftmost|farthest|script:I,J"
    )
    limits.add_argument("--points-csv", type=Path, help="write the set as CSV")

    classify = commands.add_parser("classify", help="classify one point or a grid")
    _add_system_flags(classify)
    target = classify.add_mutually_exclusive_group()
    target.add_argument("--point")
    target.add_argument("--all", action="store_true", help="classify every grid point")

    verify = commands.add_parser("verify", help="run a theorem suite")
    _add_system_flags(verify)
    verify.add_argument("--suite", choices=SUITES, required=True)
    verify.add_argument("--point", help="base point for single-point suites")

    examples = commands.add_parser("examples", help="example builders")
    examples.add_argument("action", choices=("list",))

    check = commands.add_parser("parse-check", help="validate a system description")
    check.add_argument("file", type=Path)
    return parser


def _with_seed(text: str, seed: int | None) -> str:
    name, _, raw = text.partition(":")
    if seed is None or name != "random-star":
        return text
    params = [item for item in raw.split(",") if item][:2]
    return f"{name}:{','.join([*params, str(seed)])}"


def _load(args: argparse.Namespace) -> PwAffineTreeMap | ShiftSystem:
    if args.system is not None:
        return build_system(load_system(args.system), name=args.system.stem)
    return build_example(_with_seed(args.example, args.seed))


def _budgets(
    args: argparse.Namespace, system: PwAffineTreeMap | ShiftSystem, base: Budgets
) -> Budgets:
    changes: dict[str, Any] = {}
    epsilon = args.epsilon or default_epsilon(system)
    if epsilon is not None:
        changes["epsilon"] = epsilon
    if args.depth is not None:
        changes["depth"] = args.depth
    if args.budget is not None:
        changes["time_budget"] = args.budget
        changes["component_cap"] = args.budget
    return replace(base, **changes)


def _point(system: PwAffineTreeMap | ShiftSystem, text: str | None) -> Any:
    if isinstance(system, ShiftSystem):
        return parse_symbolic_point(text) if text else SymbolicPoint.eventually_zero(())
    if text is None:
        return system.space.vertex_point(system.space.root)
    return parse_tree_point(system.space, text)


def _tree_map(system: PwAffineTreeMap | ShiftSystem, what: str) -> PwAffineTreeMap:
    if not isinstance(system, PwAffineTreeMap):
        raise _UsageError(f"{what} needs a tree map; {system.name} is symbolic")
    return system


def _label(system: PwAffineTreeMap | ShiftSystem, point: Any) -> str:
    if isinstance(system, PwAffineTreeMap):
        return format_tree_point(system.space, point)
    return str(point)


def _space(system: PwAffineTreeMap | ShiftSystem) -> Any:
    return system.space if isinstance(system, PwAffineTreeMap) else None


def _run_limits(args: argparse.Namespace) -> int:
    system = _load(args)
    budgets = _budgets(args, system, Budgets.from_settings())
    p = _point(system, args.point)
    eps = budgets.epsilon
    approx: SetApprox
    if args.kind == "omega":
        approx = omega_limit(system, p, eps, budgets.transient, budgets.window)
    elif args.kind == "alpha":
        f = _tree_map(system, "alpha")
        approx = alpha_limit(f, p, eps, budgets.depth, budgets.component_cap)
    elif args.kind == "salpha":
        approx = special_alpha_limit_direct(_tree_map(system, "salpha"), p, budgets=budgets)
    else:
        policy = BranchPolicy.parse(args.policy)
        approx = branch_alpha_limit(_tree_map(system, "branch"), p, policy, eps, budgets.depth)
    for q in approx.points:
        print(_label(system, q))
    if not approx.converged:
        logger.info("%s-limit of %s has not converged at depth %s", args.kind, p, approx.depth)
    space = _space(system)
    if args.json_path is not None:
        parameters = {"point": _label(system, p), "kind": args.kind, "policy": args.policy}
        write_json(
            args.json_path,
            envelope("limits", system.name, budgets, encode_set_approx(approx, space), parameters),
        )
    if args.points_csv is not None:
        write_points_csv(args.points_csv, approx.points, space)
    return EXIT_OK


def _run_classify(args: argparse.Namespace) -> int:
    f = _tree_map(_load(args), "classify")
    budgets = _budgets(args, f, Budgets.from_settings())
    points = sample_grid(f.space) if args.all else [_point(f, args.point)]
    verdicts = []
    for p in points:
        found = classify_point(f, p, budgets)
        verdicts.extend(found)
        summary = " ".join(f"{v.query}={v.outcome.value}" for v in found)
        print(f"{format_tree_point(f.space, p)}  {summary}")
    if args.json_path is not None:
        result = {"verdicts": [encode_verdict(v, f.space) for v in verdicts]}
        write_json(args.json_path, envelope("classify", f.name, budgets, result, {"all": args.all}))
    return EXIT_OK


def _run_verify(args: argparse.Namespace) -> int:
    f = _tree_map(_load(args), "verify")
    budgets = _budgets(args, f, suite_budgets())
    point = _point(f, args.point) if args.point else None
    report = run_suite(args.suite, f, budgets, point=point)
    print(render_table(report))
    if args.json_path is not None:
        write_json(
            args.json_path,
            envelope(
                "verify", f.name, budgets, encode_suite(report, f.space), {"suite": args.suite}
            ),
        )
    if report.status is SuiteStatus.REFUSED:
        return EXIT_USAGE
    if report.status in (SuiteStatus.FAIL, SuiteStatus.UNEXPECTED_PASS):
        return EXIT_SUITE_FAILED
    return EXIT_OK


def _run_examples(args: argparse.Namespace) -> int:
    for name, entry in sorted(EXAMPLES.items()):
        print(f"{entry.usage:<28} {entry.summary}")
    return EXIT_OK


def _run_parse_check(args: argparse.Namespace) -> int:
    description = load_system(args.file)
    if description.example is not None:
        print(f"{args.file}: ok (example {description.example})")
    else:
        counts = f"{len(description.edges)} edges, {len(description.segments)} segments"
        print(f"{args.file}: ok ({counts})")
    return EXIT_OK


_HANDLERS = {
    "limits": _run_limits,
    "classify": _run_classify,
    "verify": _run_verify,
    "examples": _run_examples,
    "parse-check": _run_parse_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    for problem in validate_runtime_environment():
        logger.warning("Configuration issue: %s", problem)
    try:
        return _HANDLERS[args.command](args)
    except BudgetExceededError as exc:
        logger.error("Budget exhausted: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (LimitLabError, ValueError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
