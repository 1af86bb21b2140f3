"""Field evaluation over decomposed grids and volume compositing."""

from .compositing import (
    DEFAULT_TERMINATION_THRESHOLD,
    CompositeBatch,
    CompositeResult,
    CompositeState,
    ShadedSample,
    TransmittanceConvention,
    UnsortedSamplesError,
    composite,
)
from .fields import (
    IndexOutOfRangeError,
    appearance_at,
    appearance_features,
    colors,
    densities,
    density_at,
    encode_direction,
    evaluate_head,
    raw_densities,
    raw_density,
    shade,
)

__all__ = [
    "DEFAULT_TERMINATION_THRESHOLD",
    "CompositeBatch",
    "CompositeResult",
    "CompositeState",
    "IndexOutOfRangeError",
    "ShadedSample",
    "TransmittanceConvention",
    "UnsortedSamplesError",
    "appearance_at",
    "appearance_features",
    "colors",
    "composite",
    "densities",
    "density_at",
    "encode_direction",
    "evaluate_head",
    "raw_densities",
    "raw_density",
    "shade",
]
