"""Cycle and byte cost model of the rendering accelerator."""

from renderer.trace import TraceFormatError

from .config import (
    CLOUD_PRESET,
    CONFIG_DIR,
    DEFAULT_SPU_COSTS,
    EDGE_PRESET,
    PRESETS,
    ConfigError,
    HardwareConfig,
    load_config,
    save_config,
)
from .tree import TreeCost, model_dual_purpose_tree
from .simulator import CycleReport, ReportComparison, ReportMismatchError, StepCost, compare, simulate

__all__ = [
    "CLOUD_PRESET",
    "CONFIG_DIR",
    "ConfigError",
    "CycleReport",
    "DEFAULT_SPU_COSTS",
    "EDGE_PRESET",
    "HardwareConfig",
    "PRESETS",
    "ReportComparison",
    "ReportMismatchError",
    "StepCost",
    "TraceFormatError",
    "TreeCost",
    "compare",
    "load_config",
    "model_dual_purpose_tree",
    "save_config",
    "simulate",
]
