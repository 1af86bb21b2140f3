"""Custom assertion helpers for rt-nerf-sim tests."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator

SCHEMA_DIR = Path(__file__).resolve().parent.parent.parent / "schemas"


class AssertionError(Exception):
    """Custom assertion error with descriptive messages."""

    pass


def assert_equal(actual: Any, expected: Any, what: str) -> None:
    """
    Assert exact equality.

    Raises:
        AssertionError: If the values differ.
    """
    if actual != expected:
        raise AssertionError(f"Expected {what} to be {expected!r}, got {actual!r}")


def assert_close(actual: float, expected: float, tolerance: float, what: str) -> None:
    """
    Assert that ``actual`` is within an absolute tolerance of ``expected``.

    Raises:
        AssertionError: If the difference exceeds the tolerance.
    """
    if not abs(float(actual) - float(expected)) <= tolerance:
        raise AssertionError(
            f"Expected {what} within {tolerance:g} of {expected!r}, got {actual!r}"
        )


def assert_between(actual: float, low: float, high: float, what: str) -> None:
    if not low <= actual <= high:
        raise AssertionError(f"Expected {what} in [{low:g}, {high:g}], got {actual!r}")


def assert_at_most(actual: float, bound: float, what: str) -> None:
    if not actual <= bound:
        raise AssertionError(f"Expected {what} to be at most {bound!r}, got {actual!r}")


def assert_at_least(actual: float, bound: float, what: str) -> None:
    if not actual >= bound:
        raise AssertionError(f"Expected {what} to be at least {bound!r}, got {actual!r}")


def assert_arrays_identical(actual: np.ndarray, expected: np.ndarray, what: str) -> None:
    """
    Assert bit-for-bit equality of two arrays, shape included.

    Raises:
        AssertionError: Reporting the first differing position.
    """
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.shape != expected.shape:
        raise AssertionError(f"{what}: shape {actual.shape} != {expected.shape}")
    if not np.array_equal(actual, expected):
        diff = np.argwhere(actual != expected)
        first = tuple(int(i) for i in diff[0])
        raise AssertionError(
            f"{what}: {diff.shape[0]} positions differ, first at {first}: "
            f"{actual[first]!r} != {expected[first]!r}"
        )


@lru_cache(maxsize=None)
def _validator(schema_name: str) -> Draft202012Validator:
    schema = json.loads((SCHEMA_DIR / f"{schema_name}.schema.json").read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def assert_matches_schema(data: Any, schema_name: str) -> None:
    """
    Validate a JSON document against a shipped schema.

    Args:
        data: Parsed JSON document.
        schema_name: Schema file stem under ``schemas/``, e.g. ``step_trace``.

    Raises:
        AssertionError: Listing the first validation error.
    """
    errors = sorted(_validator(schema_name).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        first = errors[0]
        location = "/".join(str(p) for p in first.path) or "<root>"
        raise AssertionError(
            f"Document does not match schema '{schema_name}' at {location}: {first.message}"
        )


def assert_json_file_matches_schema(path: str | Path, schema_name: str) -> dict[str, Any]:
    """Load a JSON file, validate it and return the parsed document."""
    path = Path(path)
    if not path.exists():
        raise AssertionError(f"Expected JSON output {path} to exist")
    data = json.loads(path.read_text())
    assert_matches_schema(data, schema_name)
    return data


def assert_exit_code(actual: int, expected: int, stderr: str = "") -> None:
    if actual != expected:
        raise AssertionError(
            f"Expected exit code {expected}, got {actual}; stderr was:\n{stderr}"
        )
