"""Per-step operation counters recorded during a render."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

STEP_KEYS = ("step1", "step2_1", "step2_2_grid", "step2_2_mlp", "step3")
COUNTER_KEYS = (
    "occupancy_accesses",
    "embedding_element_reads",
    "embedding_bytes",
    "multiplies",
    "adds",
    "mlp_macs",
    "sparse_queries",
    "composite_ops",
    "points_located",
    "points_shaded",
)
PRIMITIVE_KEYS = ("ray_gen", "ball_approx", "projection", "intersection", "point_query")

EMBEDDING_VALUE_BYTES = 4


class TraceFormatError(ValueError):
    """A serialized trace is missing a key or holds an invalid value."""

    def __init__(self, message: str, key: str) -> None:
        super().__init__(message)
        self.key = key


@dataclass
class SpuPrimitives:
    """Counts of geometry primitives executed in Steps 1 and 2-1."""

    ray_gen: int = 0
    ball_approx: int = 0
    projection: int = 0
    intersection: int = 0
    point_query: int = 0

    def to_dict(self) -> dict[str, int]:
        return {key: getattr(self, key) for key in PRIMITIVE_KEYS}


@dataclass
class StepTrace:
    """
    Instrumented operation counts for one render.

    Logical counters are deterministic; ``step_seconds`` holds wall-clock
    times and is excluded from any determinism comparison.
    """

    occupancy_accesses: int = 0
    embedding_element_reads: int = 0
    embedding_bytes: int = 0
    multiplies: int = 0
    adds: int = 0
    mlp_macs: int = 0
    sparse_queries: int = 0
    composite_ops: int = 0
    points_located: int = 0
    points_shaded: int = 0
    step_seconds: dict[str, float] = field(default_factory=lambda: dict.fromkeys(STEP_KEYS, 0.0))
    spu_primitives: SpuPrimitives = field(default_factory=SpuPrimitives)

    def record_shading(self, count: int, rank: int, channels: int, mlp_macs_per_sample: int) -> None:
        """Account for ``count`` samples going through grid lookup, MLP and compositing."""
        reads = count * 6 * rank * (1 + channels)
        self.embedding_element_reads += reads
        self.embedding_bytes += reads * EMBEDDING_VALUE_BYTES
        self.sparse_queries += reads
        self.multiplies += count * 3 * rank * (1 + channels)
        self.adds += count * (3 * rank - 1)
        self.mlp_macs += count * mlp_macs_per_sample
        self.composite_ops += count
        self.points_shaded += count

    def add_time(self, step: str, seconds: float) -> None:
        self.step_seconds[step] = self.step_seconds.get(step, 0.0) + seconds

    def counters(self) -> dict[str, int]:
        return {key: getattr(self, key) for key in COUNTER_KEYS}

    def logical_dict(self) -> dict[str, Any]:
        """Everything except wall times."""
        data: dict[str, Any] = self.counters()
        data["spu_primitives"] = self.spu_primitives.to_dict()
        return data

    def to_dict(self) -> dict[str, Any]:
        data = self.logical_dict()
        data["step_seconds"] = {key: float(self.step_seconds.get(key, 0.0)) for key in STEP_KEYS}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StepTrace":
        """
        Rebuild a trace from its JSON form.

        Raises:
            TraceFormatError: Naming the first missing or invalid key.
        """
        if not isinstance(data, dict):
            raise TraceFormatError("trace must be a JSON object", "<root>")
        values: dict[str, Any] = {}
        for key in COUNTER_KEYS:
            values[key] = _read_count(data, key, key)
        primitives = data.get("spu_primitives")
        if not isinstance(primitives, dict):
            raise TraceFormatError("missing trace key 'spu_primitives'", "spu_primitives")
        values["spu_primitives"] = SpuPrimitives(
            **{key: _read_count(primitives, key, f"spu_primitives.{key}") for key in PRIMITIVE_KEYS}
        )
        seconds = data.get("step_seconds")
        if not isinstance(seconds, dict):
            raise TraceFormatError("missing trace key 'step_seconds'", "step_seconds")
        step_seconds = {}
        for key in STEP_KEYS:
            if key not in seconds:
                raise TraceFormatError(f"missing trace key 'step_seconds.{key}'", f"step_seconds.{key}")
            step_seconds[key] = float(seconds[key])
        values["step_seconds"] = step_seconds
        trace = cls(**values)
        if trace.points_shaded > trace.points_located:
            raise TraceFormatError("points_shaded exceeds points_located", "points_shaded")
        return trace

    @classmethod
    def read(cls, path: str | Path) -> "StepTrace":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _read_count(data: dict[str, Any], key: str, label: str) -> int:
    if key not in data:
        raise TraceFormatError(f"missing trace key '{label}'", label)
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise TraceFormatError(f"trace key '{label}' must be a non-negative integer, got {value!r}", label)
    return value

