"""Per-factor sparsity census of a decomposed grid."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from scene.models import ModeFactors, VMDecomposition
from sparse.hybrid import Variant, choose_variant

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorSparsity:
    """Zero fraction of one factor vector or matrix, e.g. ``density.r0.v_x.c0``."""

    name: str
    shape: tuple[int, ...]
    zeros: int
    size: int

    @property
    def sparsity(self) -> float:
        return self.zeros / self.size

    @property
    def variant(self) -> Variant:
        return choose_variant(self.zeros, self.size)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "shape": list(self.shape),
            "zeros": self.zeros,
            "size": self.size,
            "sparsity": self.sparsity,
            "variant": self.variant.value,
        }


@dataclass(frozen=True)
class SparsityCensus:
    factors: tuple[FactorSparsity, ...]

    @property
    def low_count(self) -> int:
        return sum(1 for f in self.factors if f.variant is Variant.BITMAP)

    @property
    def high_count(self) -> int:
        return len(self.factors) - self.low_count

    @property
    def low_share(self) -> float:
        """Share of factors below the 80% threshold; 1.0 for an empty census."""
        if not self.factors:
            return 1.0
        return self.low_count / len(self.factors)

    @property
    def high_share(self) -> float:
        return 1.0 - self.low_share

    def to_dict(self) -> dict[str, Any]:
        return {
            "factors": [f.to_dict() for f in self.factors],
            "low_count": self.low_count,
            "high_count": self.high_count,
            "low_share": self.low_share,
            "high_share": self.high_share,
        }


def iter_named_factors(decomp: VMDecomposition) -> Iterator[tuple[str, np.ndarray]]:
    """Every factor array of both fields in canonical order with its census name."""
    fields: tuple[tuple[str, ModeFactors], ...] = (
        ("density", decomp.density),
        ("appearance", decomp.appearance),
    )
    for field_name, factors in fields:
        for r, name, c, array in factors.iter_factors():
            yield f"{field_name}.r{r}.{name}.c{c}", array


def sparsity_census(decomp: VMDecomposition) -> SparsityCensus:
    entries = []
    for name, array in iter_named_factors(decomp):
        zeros = int(array.size - np.count_nonzero(array))
        entries.append(FactorSparsity(name, tuple(array.shape), zeros, int(array.size)))
    census = SparsityCensus(tuple(entries))
    logger.debug(
        "Census: %d factors, %.1f%% below the COO threshold",
        len(entries),
        100.0 * census.low_share,
    )
    return census
