"""Runtime settings for limitlab."""

from __future__ import annotations

import os
from fractions import Fraction
from pathlib import Path
from typing import Literal, cast

from dotenv import load_dotenv


def _load_dotenv_if_enabled() -> None:
    flag = os.getenv("PYTHON_DOTENV_DISABLED", "").strip().lower()
    if flag in {"1", "true", "yes"}:
        return
    load_dotenv()


_load_dotenv_if_enabled()

PROJECT_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = PROJECT_ROOT / "fixtures"
REPORT_SCHEMA_PATH = PROJECT_ROOT / "schema" / "report.schema.json"

APP_NAME = "limitlab"
REPORT_SCHEMA_VERSION = "1.0"

LogFormat = Literal["text", "json"]
LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def _parse_log_format(raw: str) -> LogFormat:
    if raw in {"text", "json"}:
        return cast(LogFormat, raw)
    return "text"


def _parse_log_level(raw: str) -> LogLevel:
    if raw in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
        return cast(LogLevel, raw)
    return "INFO"


def _parse_positive_int(raw: str, *, default: int, minimum: int = 1) -> int:
    try:
        value = int(raw.strip())
    except ValueError:
        return default
    return value if value >= minimum else default


def _parse_positive_rational(raw: str, *, default: Fraction) -> Fraction:
    try:
        value = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError):
        return default
    return value if value > 0 else default


DEFAULT_EPSILON = _parse_positive_rational(
    os.getenv("LIMITLAB_EPSILON", "1/1024"),
    default=Fraction(1, 1024),
)
DEFAULT_DEPTH = _parse_positive_int(os.getenv("LIMITLAB_DEPTH", "64"), default=64)
DEFAULT_WINDOW = _parse_positive_int(os.getenv("LIMITLAB_WINDOW", "256"), default=256)
DEFAULT_TRANSIENT = _parse_positive_int(
    os.getenv("LIMITLAB_TRANSIENT", "64"),
    default=64,
    minimum=0,
)
DEFAULT_TIME_BUDGET = _parse_positive_int(
    os.getenv("LIMITLAB_TIME_BUDGET", "4096"),
    default=4096,
)
COMPONENT_CAP = _parse_positive_int(
    os.getenv("LIMITLAB_COMPONENT_CAP", "100000"),
    default=100000,
)
CHAIN_CAP = _parse_positive_int(os.getenv("LIMITLAB_CHAIN_CAP", "200000"), default=200000)
DEFAULT_MAX_PERIOD = _parse_positive_int(os.getenv("LIMITLAB_MAX_PERIOD", "12"), default=12)
SUITE_SAMPLES = _parse_positive_int(os.getenv("LIMITLAB_SUITE_SAMPLES", "128"), default=128)
DEFAULT_SEED = _parse_positive_int(os.getenv("LIMITLAB_SEED", "0"), default=0, minimum=0)

APP_LOG_FORMAT: LogFormat = _parse_log_format(os.getenv("APP_LOG_FORMAT", "text").strip().lower())
APP_LOG_LEVEL: LogLevel = _parse_log_level(os.getenv("APP_LOG_LEVEL", "INFO").strip().upper())


def validate_runtime_environment() -> list[str]:
    """Return configuration problems that make default budgets unusable."""
    errors: list[str] = []
    if DEFAULT_EPSILON >= 1:
        errors.append("LIMITLAB_EPSILON must be smaller than 1.")
    if DEFAULT_DEPTH < 2:
        errors.append("LIMITLAB_DEPTH must be at least 2 for tail windows.")
    return errors
