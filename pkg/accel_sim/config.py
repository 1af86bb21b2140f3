"""Hardware configuration of the accelerator model and its shipped presets."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from utils.byte_size import ByteSize

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# Non-physical placeholder costs in cycles per primitive.
DEFAULT_SPU_COSTS = {
    "ray_gen": 8,
    "ball_approx": 6,
    "projection": 20,
    "intersection": 14,
    "point_query": 2,
}


class ConfigError(ValueError):
    """A hardware configuration is malformed or violates an invariant."""


@dataclass(frozen=True)
class HardwareConfig:
    """
    Unit counts, throughputs and memory system of one accelerator.

    ``mixed_split`` is the share of tree leaves serving searches while the
    dual-purpose tree runs in mixed mode.
    """

    name: str
    num_spu: int
    num_ppu: int
    sram_bytes: int
    dram_bandwidth: float
    multipliers_per_ppu: int = 64
    tree_width: int = 64
    mlp_macs_per_cycle: int = 1024
    frequency_hz: float = 1e9
    spu_cost_table: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SPU_COSTS))
    mixed_split: float = 0.5

    def __post_init__(self) -> None:
        for name in ("num_spu", "num_ppu", "multipliers_per_ppu", "tree_width", "mlp_macs_per_cycle"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("frequency_hz", "dram_bandwidth", "sram_bytes"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.tree_width & (self.tree_width - 1):
            raise ConfigError(f"tree_width must be a power of two, got {self.tree_width}")
        if not 0.0 < self.mixed_split < 1.0:
            raise ConfigError(f"mixed_split must lie in (0, 1), got {self.mixed_split}")
        missing = set(DEFAULT_SPU_COSTS) - set(self.spu_cost_table)
        if missing:
            raise ConfigError(f"spu_cost_table missing {sorted(missing)}")
        for key, cost in self.spu_cost_table.items():
            if key not in DEFAULT_SPU_COSTS:
                raise ConfigError(f"spu_cost_table has unknown primitive {key!r}")
            if not isinstance(cost, int) or cost < 1:
                raise ConfigError(f"spu_cost_table[{key!r}] must be a positive integer, got {cost!r}")

    @property
    def sram(self) -> ByteSize:
        return ByteSize.from_bytes(int(self.sram_bytes))

    @property
    def bandwidth(self) -> ByteSize:
        """Bytes transferred per second."""
        return ByteSize.from_bytes(int(self.dram_bandwidth))

    def replace(self, **changes: Any) -> "HardwareConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["spu_cost_table"] = dict(sorted(self.spu_cost_table.items()))
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Any) -> "HardwareConfig":
        """
        Build a config from a JSON object holding exactly the config fields.

        Raises:
            ConfigError: On missing, unknown or invalid fields.
        """
        if not isinstance(data, dict):
            raise ConfigError("hardware config must be a JSON object")
        expected = {f.name for f in dataclasses.fields(cls)}
        missing = sorted(expected - set(data))
        unknown = sorted(set(data) - expected)
        if missing:
            raise ConfigError(f"hardware config missing fields {missing}")
        if unknown:
            raise ConfigError(f"hardware config has unknown fields {unknown}")
        if not isinstance(data["spu_cost_table"], dict):
            raise ConfigError("spu_cost_table must be an object")
        return cls(**{**data, "spu_cost_table": dict(data["spu_cost_table"])})


EDGE_PRESET = HardwareConfig(
    name="rt-nerf-edge",
    num_spu=1,
    num_ppu=1,
    sram_bytes=ByteSize.from_megabytes(3.5).bytes,
    dram_bandwidth=float(ByteSize.from_gigabytes(17).bytes),
)

CLOUD_PRESET = HardwareConfig(
    name="rt-nerf-cloud",
    num_spu=30,
    num_ppu=30,
    sram_bytes=ByteSize.from_megabytes(105).bytes,
    dram_bandwidth=float(ByteSize.from_gigabytes(510).bytes),
)

PRESETS = {preset.name: preset for preset in (EDGE_PRESET, CLOUD_PRESET)}


def load_config(source: str | Path) -> HardwareConfig:
    """
    Load a config from a JSON path or a bare preset name such as ``rt-nerf-edge``.

    Bare names resolve against the shipped ``configs/`` directory first and
    fall back to the built-in presets.

    Raises:
        ConfigError: If the file cannot be found or parsed.
    """
    path = Path(source)
    if not path.exists() and path.suffix == "" and len(path.parts) == 1:
        shipped = CONFIG_DIR / f"{source}.json"
        if shipped.exists():
            path = shipped
        elif str(source) in PRESETS:
            return PRESETS[str(source)]
    if not path.exists():
        raise ConfigError(f"no hardware config at {source!s} and no preset of that name")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from exc
    config = HardwareConfig.from_dict(data)
    logger.debug("Loaded hardware config %s from %s", config.name, path)
    return config


def save_config(config: HardwareConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(config.to_json() + "\n")
    return path
