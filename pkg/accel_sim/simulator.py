"""
Step-level cycle model of the accelerator.

SPUs run ray generation and sample location, PPUs run grid interpolation,
the MLP and compositing. Each step costs ``max(compute, memory)`` cycles,
with memory cycles being the step's DRAM bytes at the configured bandwidth.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from accel_sim.config import HardwareConfig
from accel_sim.tree import TreeCost, model_dual_purpose_tree
from renderer.trace import PRIMITIVE_KEYS, STEP_KEYS, StepTrace
from sparse.profile import CodecStats

logger = logging.getLogger(__name__)

LOCATION_PRIMITIVES = tuple(k for k in PRIMITIVE_KEYS if k != "ray_gen")


class ReportMismatchError(ValueError):
    """Two cycle reports do not cover the same steps."""


@dataclass(frozen=True)
class StepCost:
    compute: float
    memory_bytes: int
    memory: float

    @property
    def cycles(self) -> float:
        return max(self.compute, self.memory)

    @property
    def memory_bound(self) -> bool:
        return self.memory > self.compute


@dataclass
class CycleReport:
    """Per-step cycles, breakdown and throughput of one simulated frame."""

    config_name: str
    frequency_hz: float
    cycles: dict[str, float]
    compute_cycles: dict[str, float]
    memory_cycles: dict[str, float]
    memory_bytes: dict[str, int]
    memory_bound: dict[str, bool]
    total_cycles: float
    tree_mode_census: dict[str, float]
    codec_enabled: bool = False
    served_operations: dict[str, int] = field(default_factory=dict)
    skipped_multiplies: int = 0

    @property
    def fps(self) -> float:
        return self.frequency_hz / self.total_cycles

    @property
    def breakdown(self) -> dict[str, float]:
        raw_total = sum(self.cycles.values())
        if raw_total == 0:
            return {key: 1.0 / len(self.cycles) for key in self.cycles}
        return {key: value / raw_total for key, value in self.cycles.items()}

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config_name,
            "frequency_hz": self.frequency_hz,
            "cycles": dict(self.cycles),
            "compute_cycles": dict(self.compute_cycles),
            "memory_cycles": dict(self.memory_cycles),
            "memory_bytes": dict(self.memory_bytes),
            "memory_bound": dict(self.memory_bound),
            "total_cycles": self.total_cycles,
            "fps": self.fps,
            "breakdown": self.breakdown,
            "tree_mode_census": dict(self.tree_mode_census),
            "codec_enabled": self.codec_enabled,
            "served_operations": dict(self.served_operations),
            "skipped_multiplies": self.skipped_multiplies,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CycleReport":
        return cls(
            config_name=data["config"],
            frequency_hz=float(data["frequency_hz"]),
            cycles={k: float(v) for k, v in data["cycles"].items()},
            compute_cycles={k: float(v) for k, v in data["compute_cycles"].items()},
            memory_cycles={k: float(v) for k, v in data["memory_cycles"].items()},
            memory_bytes={k: int(v) for k, v in data["memory_bytes"].items()},
            memory_bound={k: bool(v) for k, v in data["memory_bound"].items()},
            total_cycles=float(data["total_cycles"]),
            tree_mode_census=dict(data["tree_mode_census"]),
            codec_enabled=bool(data.get("codec_enabled", False)),
            served_operations=dict(data.get("served_operations", {})),
            skipped_multiplies=int(data.get("skipped_multiplies", 0)),
        )


def _memory(config: HardwareConfig, nbytes: int) -> float:
    return nbytes * config.frequency_hz / config.dram_bandwidth


def _grid_bytes(trace: StepTrace, codec: CodecStats | None, config: HardwareConfig) -> int:
    """Embedding traffic: the whole store once if it fits in SRAM, otherwise every lookup."""
    if codec is None:
        return trace.embedding_bytes
    if codec.encoded_bytes and codec.encoded_bytes <= config.sram_bytes:
        return min(codec.encoded_bytes, math.ceil(trace.embedding_bytes * codec.compression_ratio))
    return math.ceil(trace.embedding_bytes * codec.compression_ratio)


def _bitmap_query_cycles(bitmap_queries: int, codec: CodecStats) -> int:
    """Profiled bitmap latency scaled to the traced lookups; one cycle each without a profile."""
    if codec.bitmap_queries == 0:
        return bitmap_queries
    return -(-bitmap_queries * codec.bitmap_latency_cycles // codec.bitmap_queries)


def simulate(
    trace: StepTrace | dict[str, Any],
    codec_stats: CodecStats | None,
    config: HardwareConfig,
) -> CycleReport:
    """
    Cost one traced frame on the given hardware.

    Args:
        trace: Operation counts of a render, or their JSON form.
        codec_stats: Query-latency histogram. COO lookups hold a search leaf
            for their mean latency and bitmap lookups hold the high-density
            unit for theirs. None or a codec-disabled profile turns every
            lookup into a dense one-cycle read.
        config: Hardware to simulate.

    Returns:
        The per-step report.

    Raises:
        TraceFormatError: If a dict trace is missing or has invalid counters.
    """
    if isinstance(trace, dict):
        trace = StepTrace.from_dict(trace)
    codec_enabled = codec_stats is not None and codec_stats.codec_enabled
    costs = config.spu_cost_table
    prims = trace.spu_primitives
    served: dict[str, int] = {key: getattr(prims, key) for key in PRIMITIVE_KEYS}

    steps: dict[str, StepCost] = {}
    step1 = prims.ray_gen * costs["ray_gen"] / config.num_spu
    steps["step1"] = StepCost(step1, 0, 0.0)

    locate = sum(getattr(prims, key) * costs[key] for key in LOCATION_PRIMITIVES) / config.num_spu
    occupancy_bytes = math.ceil(trace.occupancy_accesses / 8)
    steps["step2_1"] = StepCost(locate, occupancy_bytes, _memory(config, occupancy_bytes))

    queries = trace.sparse_queries
    if codec_enabled:
        skipped = round(trace.multiplies * codec_stats.zero_product_fraction)
        tree = model_dual_purpose_tree(
            trace.adds, queries, codec_stats.coo_fraction, config, max(1.0, codec_stats.coo_latency_mean)
        )
        bitmap_queries = queries - tree.searches_served
        query_cycles = _bitmap_query_cycles(bitmap_queries, codec_stats)
    else:
        skipped = 0
        tree = model_dual_purpose_tree(trace.adds, 0, 0.0, config)
        bitmap_queries = queries
        query_cycles = queries
    executed = trace.multiplies - skipped
    grid_compute = (
        math.ceil(executed / config.multipliers_per_ppu) + tree.cycles + query_cycles
    ) / config.num_ppu
    grid_bytes = _grid_bytes(trace, codec_stats, config)
    steps["step2_2_grid"] = StepCost(grid_compute, grid_bytes, _memory(config, grid_bytes))

    mlp = math.ceil(trace.mlp_macs / config.mlp_macs_per_cycle) / config.num_ppu
    steps["step2_2_mlp"] = StepCost(mlp, 0, 0.0)
    steps["step3"] = StepCost(trace.composite_ops / config.num_ppu, 0, 0.0)

    served.update(
        {
            "multiplies": executed + skipped,
            "adds": tree.adds_served,
            "sparse_queries": tree.searches_served + bitmap_queries,
            "mlp_macs": trace.mlp_macs,
            "composite_ops": trace.composite_ops,
        }
    )
    report = _assemble(config, steps, tree, codec_enabled, served, skipped)
    logger.info(
        "Simulated on %s: %.0f cycles, %.1f fps",
        config.name,
        report.total_cycles,
        report.fps,
    )
    return report


def _assemble(
    config: HardwareConfig,
    steps: dict[str, StepCost],
    tree: TreeCost,
    codec_enabled: bool,
    served: dict[str, int],
    skipped: int,
) -> CycleReport:
    cycles = {key: steps[key].cycles for key in STEP_KEYS}
    total = sum(cycles.values())
    return CycleReport(
        config_name=config.name,
        frequency_hz=config.frequency_hz,
        cycles=cycles,
        compute_cycles={key: steps[key].compute for key in STEP_KEYS},
        memory_cycles={key: steps[key].memory for key in STEP_KEYS},
        memory_bytes={key: steps[key].memory_bytes for key in STEP_KEYS},
        memory_bound={key: steps[key].memory_bound for key in STEP_KEYS},
        total_cycles=total if total > 0 else 1.0,
        tree_mode_census=tree.census(),
        codec_enabled=codec_enabled,
        served_operations=served,
        skipped_multiplies=skipped,
    )


def _speedup(before: float, after: float) -> float:
    if after == 0:
        return 1.0 if before == 0 else math.inf
    return before / after


def _json_ratio(value: float) -> float | str:
    return "unbounded" if math.isinf(value) else value


@dataclass(frozen=True)
class ReportComparison:
    """How much faster ``candidate`` runs than ``baseline``, step by step."""

    baseline: str
    candidate: str
    step_speedup: dict[str, float]
    total_speedup: float
    fraction_shift: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline,
            "candidate": self.candidate,
            "step_speedup": {k: _json_ratio(v) for k, v in self.step_speedup.items()},
            "total_speedup": _json_ratio(self.total_speedup),
            "fraction_shift": dict(self.fraction_shift),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compare(a: CycleReport | dict[str, Any], b: CycleReport | dict[str, Any]) -> ReportComparison:
    """
    Speedup of report ``b`` over report ``a``.

    Raises:
        ReportMismatchError: If the reports cover different steps.
    """
    a = CycleReport.from_dict(a) if isinstance(a, dict) else a
    b = CycleReport.from_dict(b) if isinstance(b, dict) else b
    if set(a.cycles) != set(b.cycles):
        raise ReportMismatchError(
            f"step keys differ: {sorted(set(a.cycles) ^ set(b.cycles))}"
        )
    keys = [key for key in STEP_KEYS if key in a.cycles] + sorted(set(a.cycles) - set(STEP_KEYS))
    fa, fb = a.breakdown, b.breakdown
    return ReportComparison(
        baseline=a.config_name,
        candidate=b.config_name,
        step_speedup={key: _speedup(a.cycles[key], b.cycles[key]) for key in keys},
        total_speedup=_speedup(a.total_cycles, b.total_cycles),
        fraction_shift={key: fb[key] - fa[key] for key in keys},
    )
