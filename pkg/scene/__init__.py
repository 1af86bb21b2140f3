"""Scene definitions, synthesis and the binary scene container."""

from .models import (
    AppearanceHead,
    DensityActivation,
    ModeFactors,
    OccupancyGrid,
    Scene,
    SceneBounds,
    VMDecomposition,
    occupancy_ratio,
)
from .container import (
    BadMagicError,
    DimensionMismatchError,
    SceneFormatError,
    TruncatedPayloadError,
    VersionMismatchError,
    decode_scene,
    encode_scene,
    load_scene,
    save_scene,
)
from .generator import (
    GeneratorSettings,
    OccupancyUnreachableError,
    generate_occluder_scene,
    generate_synthetic_scene,
)

__all__ = [
    "AppearanceHead",
    "BadMagicError",
    "DensityActivation",
    "DimensionMismatchError",
    "GeneratorSettings",
    "ModeFactors",
    "OccupancyGrid",
    "OccupancyUnreachableError",
    "Scene",
    "SceneBounds",
    "SceneFormatError",
    "TruncatedPayloadError",
    "VMDecomposition",
    "VersionMismatchError",
    "decode_scene",
    "encode_scene",
    "generate_occluder_scene",
    "generate_synthetic_scene",
    "load_scene",
    "occupancy_ratio",
    "save_scene",
]
