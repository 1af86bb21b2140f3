"""Query results shared by both sparse formats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QueryOutOfBoundsError(IndexError):
    """A query coordinate lies outside the encoded matrix."""


@dataclass(frozen=True)
class QueryResult:
    """Decoded value (0 for absent elements) and the lookup latency in cycles."""

    value: float
    cycles: int


def check_bounds(rows: int, cols: int, x, y) -> None:
    xs = np.asarray(x)
    ys = np.asarray(y)
    bad = (xs < 0) | (xs >= rows) | (ys < 0) | (ys >= cols)
    if np.any(bad):
        raise QueryOutOfBoundsError(f"query ({x}, {y}) outside {rows}x{cols} matrix")
