"""
Dual-purpose adder/search tree of a PPU.

In adder mode every leaf accumulates. In mixed mode ``mixed_split`` of the
leaves form search sub-trees for COO lookups while the rest keep adding;
once the searches are drained the tree drops back to adder mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from accel_sim.config import HardwareConfig


@dataclass(frozen=True)
class TreeCost:
    """Cycles spent by the tree and how they split between its two modes."""

    cycles: int
    adder_cycles: int
    mixed_cycles: int
    adds_served: int
    searches_served: int
    tree_width: int

    @property
    def served_operations(self) -> int:
        return self.adds_served + self.searches_served

    @property
    def utilization(self) -> float:
        """Served operations over leaf-cycles available; 0 for an idle tree."""
        if self.cycles == 0:
            return 0.0
        return self.served_operations / (self.tree_width * self.cycles)

    def census(self) -> dict[str, float]:
        """Fraction of tree cycles per mode; an idle tree counts as pure adder mode."""
        if self.cycles == 0:
            return {"adder": 1.0, "mixed": 0.0}
        return {
            "adder": self.adder_cycles / self.cycles,
            "mixed": self.mixed_cycles / self.cycles,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "cycles": self.cycles,
            "adder_cycles": self.adder_cycles,
            "mixed_cycles": self.mixed_cycles,
            "adds_served": self.adds_served,
            "searches_served": self.searches_served,
            "utilization": self.utilization,
            "census": self.census(),
        }


def search_leaves(config: HardwareConfig) -> int:
    return max(1, int(config.tree_width * config.mixed_split))


def model_dual_purpose_tree(
    adds: int,
    searches: int,
    high_sparsity_fraction: float,
    config: HardwareConfig,
    search_latency: float = 1.0,
) -> TreeCost:
    """
    Cost ``adds`` accumulations and the high-sparsity share of ``searches``.

    Args:
        adds: Additions to reduce.
        searches: Sparse lookups issued.
        high_sparsity_fraction: Share of lookups that go to COO-encoded factors.
        config: Supplies ``tree_width`` and ``mixed_split``.
        search_latency: Cycles a search holds its search leaf, the COO lookup
            latency of the profiled encodings.

    Returns:
        Total cycles with the per-mode census.

    Raises:
        ValueError: If a count is negative or the fraction is outside [0, 1]
            or the latency is below one cycle.
    """
    if adds < 0 or searches < 0:
        raise ValueError(f"operation counts must be non-negative, got adds={adds} searches={searches}")
    if not 0.0 <= high_sparsity_fraction <= 1.0:
        raise ValueError(f"high_sparsity_fraction must lie in [0, 1], got {high_sparsity_fraction}")
    if search_latency < 1.0:
        raise ValueError(f"search_latency must be at least one cycle, got {search_latency}")
    width = config.tree_width
    tree_searches = math.ceil(searches * high_sparsity_fraction)
    if tree_searches == 0:
        cycles = math.ceil(adds / width)
        return TreeCost(cycles, cycles, 0, adds, 0, width)

    search_width = search_leaves(config)
    add_width = width - search_width
    mixed = math.ceil(tree_searches * search_latency / search_width)
    adds_in_mixed = min(adds, add_width * mixed)
    adder = math.ceil((adds - adds_in_mixed) / width)
    return TreeCost(mixed + adder, adder, mixed, adds, tree_searches, width)
