"""
Query-stream profiling of a scene's encoded factors.

The stream is what grid interpolation issues for every occupied cell: per
rank, channel and field, one vector and one matrix lookup for each of the
three modes, i.e. ``6 * R * (1 + C)`` lookups per cell.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from scene.models import Scene
from sparse.census import iter_named_factors
from sparse.hybrid import SizeModel, Variant, encode, query_many

logger = logging.getLogger(__name__)

# vector factor -> (its cell axis, paired matrix, cell axes of the matrix)
_MODE_AXES = {
    "v_x": (0, "m_yz", (1, 2)),
    "v_y": (1, "m_xz", (0, 2)),
    "v_z": (2, "m_xy", (0, 1)),
}


@dataclass
class CodecStats:
    """Latency metadata of a query stream, consumed by the simulator."""

    codec_enabled: bool
    queries: int = 0
    cycle_histogram: dict[int, int] = field(default_factory=dict)
    bitmap_queries: int = 0
    coo_queries: int = 0
    dense_queries: int = 0
    zero_product_fraction: float = 0.0
    encoded_bytes: int = 0
    dense_bytes: int = 0
    coo_latency_mean: float = 0.0

    @property
    def coo_fraction(self) -> float:
        return self.coo_queries / self.queries if self.queries else 0.0

    @property
    def latency_cycles(self) -> int:
        """Cycles summed over the whole histogram."""
        return sum(cycles * count for cycles, count in self.cycle_histogram.items())

    @property
    def bitmap_latency_cycles(self) -> int:
        return self.latency_cycles - round(self.coo_queries * self.coo_latency_mean)

    @property
    def compression_ratio(self) -> float:
        """Encoded over dense bytes; 1.0 when nothing is stored."""
        return self.encoded_bytes / self.dense_bytes if self.dense_bytes else 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "codec_enabled": self.codec_enabled,
            "queries": self.queries,
            "cycle_histogram": {str(k): v for k, v in sorted(self.cycle_histogram.items())},
            "bitmap_queries": self.bitmap_queries,
            "coo_queries": self.coo_queries,
            "dense_queries": self.dense_queries,
            "zero_product_fraction": self.zero_product_fraction,
            "encoded_bytes": self.encoded_bytes,
            "dense_bytes": self.dense_bytes,
            "coo_latency_mean": self.coo_latency_mean,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CodecStats":
        try:
            return cls(
                codec_enabled=bool(data["codec_enabled"]),
                queries=int(data["queries"]),
                cycle_histogram={int(k): int(v) for k, v in data["cycle_histogram"].items()},
                bitmap_queries=int(data["bitmap_queries"]),
                coo_queries=int(data["coo_queries"]),
                dense_queries=int(data["dense_queries"]),
                zero_product_fraction=float(data["zero_product_fraction"]),
                encoded_bytes=int(data["encoded_bytes"]),
                dense_bytes=int(data["dense_bytes"]),
                coo_latency_mean=float(data["coo_latency_mean"]),
            )
        except KeyError as exc:
            raise ValueError(f"codec stats missing key {exc.args[0]!r}") from exc


def _lookup_coords(name: str, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row/column of each cell's lookup into a factor; vectors are ``1 x n``."""
    if name.startswith("v_"):
        axis = _MODE_AXES[name][0]
        return np.zeros(cells.shape[0], dtype=np.int64), cells[:, axis]
    for _, matrix, axes in _MODE_AXES.values():
        if matrix == name:
            return cells[:, axes[0]], cells[:, axes[1]]
    raise KeyError(name)


def profile_queries(
    scene: Scene,
    force_variant: Variant | None = None,
    size_model: SizeModel | None = None,
) -> CodecStats:
    """
    Encode every factor and replay the grid lookups of all occupied cells.

    Args:
        scene: Scene whose factors are encoded.
        force_variant: Encode every factor with this format instead of the policy.
        size_model: Storage widths for the byte totals.

    Returns:
        Cycle histogram, per-variant query counts, zero-product fraction and sizes.
    """
    size_model = size_model or SizeModel()
    cells = scene.grid.occupied_cells().astype(np.int64)
    stats = CodecStats(codec_enabled=True)
    histogram: Counter[int] = Counter()
    coo_cycles = 0
    products = 0
    zero_products = 0
    looked_up: dict[str, np.ndarray] = {}

    for name, array in iter_named_factors(scene.decomp):
        matrix = array.reshape(1, -1) if array.ndim == 1 else array
        enc = encode(matrix, force_variant, size_model)
        stats.encoded_bytes += enc.encoded_bytes
        stats.dense_bytes += int(array.size) * size_model.value_width
        if cells.shape[0] == 0:
            continue
        factor = name.split(".")[2]
        xs, ys = _lookup_coords(factor, cells)
        values, cycles = query_many(enc, xs, ys)
        histogram.update(Counter(cycles.tolist()))
        if enc.variant is Variant.COO:
            stats.coo_queries += int(cycles.size)
            coo_cycles += int(cycles.sum())
        else:
            stats.bitmap_queries += int(cycles.size)
        looked_up[name] = values

    # each vector lookup pairs with its matrix lookup in one multiply
    for name, values in looked_up.items():
        field_name, rank, factor, channel = name.split(".")
        if factor not in _MODE_AXES:
            continue
        partner = looked_up[f"{field_name}.{rank}.{_MODE_AXES[factor][1]}.{channel}"]
        products += int(values.size)
        zero_products += int(np.count_nonzero((values == 0) | (partner == 0)))

    stats.queries = stats.bitmap_queries + stats.coo_queries
    stats.cycle_histogram = dict(sorted(histogram.items()))
    stats.zero_product_fraction = zero_products / products if products else 0.0
    stats.coo_latency_mean = coo_cycles / stats.coo_queries if stats.coo_queries else 0.0
    logger.info(
        "Profiled %d queries over %d cells: %.1f%% COO, %d of %d bytes",
        stats.queries,
        cells.shape[0],
        100.0 * stats.coo_fraction,
        stats.encoded_bytes,
        stats.dense_bytes,
    )
    return stats


def dense_codec_stats(scene: Scene, size_model: SizeModel | None = None) -> CodecStats:
    """The codec-disabled counterpart: every lookup is a one-cycle dense read."""
    size_model = size_model or SizeModel()
    decomp = scene.decomp
    queries = scene.grid.popcount * 6 * decomp.rank * (1 + decomp.channels)
    dense_bytes = sum(int(a.size) for _, a in iter_named_factors(decomp)) * size_model.value_width
    return CodecStats(
        codec_enabled=False,
        queries=queries,
        cycle_histogram={1: queries} if queries else {},
        dense_queries=queries,
        encoded_bytes=dense_bytes,
        dense_bytes=dense_bytes,
    )
