"""
Bitmap sparse format: row pointers, a 1-bit presence map and packed non-zeros.

A lookup fetches the bitmap row, counts the set bits left of the column and
reads the value at ``row_ptr[x] + count``. A zero bit ends the lookup after
the first cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sparse.query import QueryResult, check_bounds

ZERO_CYCLES = 1
HIT_CYCLES = 3


@dataclass(frozen=True, eq=False)
class BitmapEncoding:
    """``row_ptr`` has ``rows + 1`` entries; ``row_ptr[rows]`` equals the non-zero count."""

    rows: int
    cols: int
    row_ptr: np.ndarray
    bitmap: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.bitmap.shape != (self.rows, self.cols):
            raise ValueError(f"bitmap shape {self.bitmap.shape} != ({self.rows}, {self.cols})")
        counts = np.count_nonzero(self.bitmap, axis=1)
        expected = np.concatenate([[0], np.cumsum(counts)])
        if self.row_ptr.shape != (self.rows + 1,) or not np.array_equal(self.row_ptr, expected):
            raise ValueError("row_ptr is not the prefix sum of per-row popcounts")
        if self.values.shape != (int(expected[-1]),):
            raise ValueError(f"values length {self.values.shape[0]} != popcount {int(expected[-1])}")

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @cached_property
    def _bits_before(self) -> np.ndarray:
        bits = self.bitmap.astype(np.int64)
        return np.cumsum(bits, axis=1) - bits


def encode_bitmap(matrix: np.ndarray) -> BitmapEncoding:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"bitmap encoding needs a 2-D matrix, got shape {matrix.shape}")
    bitmap = matrix != 0
    counts = np.count_nonzero(bitmap, axis=1)
    row_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return BitmapEncoding(matrix.shape[0], matrix.shape[1], row_ptr, bitmap, matrix[bitmap].copy())


def query_bitmap(enc: BitmapEncoding, x: int, y: int) -> QueryResult:
    """
    Look up element ``(x, y)``.

    Returns:
        The value with 1 cycle for a zero bit and 3 cycles otherwise.

    Raises:
        QueryOutOfBoundsError: If ``(x, y)`` is outside the matrix.
    """
    check_bounds(enc.rows, enc.cols, x, y)
    if not enc.bitmap[x, y]:
        return QueryResult(0.0, ZERO_CYCLES)
    address = int(enc.row_ptr[x]) + int(np.count_nonzero(enc.bitmap[x, :y]))
    return QueryResult(float(enc.values[address]), HIT_CYCLES)


def query_bitmap_many(enc: BitmapEncoding, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized lookups; returns ``(values, cycles)``."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    check_bounds(enc.rows, enc.cols, xs, ys)
    present = enc.bitmap[xs, ys]
    values = np.zeros(xs.shape, dtype=np.float64)
    if present.any():
        address = enc.row_ptr[xs[present]] + enc._bits_before[xs[present], ys[present]]
        values[present] = enc.values[address]
    cycles = np.where(present, HIT_CYCLES, ZERO_CYCLES)
    return values, cycles


def decode_bitmap(enc: BitmapEncoding) -> np.ndarray:
    out = np.zeros((enc.rows, enc.cols), dtype=enc.values.dtype)
    out[enc.bitmap] = enc.values
    return out
