"""Uniform and rt render pipelines with per-step instrumentation."""

from .image_io import Image, ImageDelta, compare_images, read_rgb8, write_image, write_png, write_ppm
from .pipeline import AccessReport, Pipeline, RenderOptions, compare_access_counts, render
from .sampling import (
    RaySampleBatch,
    SamplePoint,
    SampleRange,
    locate_cells,
    locate_points_rt,
    locate_points_uniform,
)
from .trace import COUNTER_KEYS, PRIMITIVE_KEYS, STEP_KEYS, SpuPrimitives, StepTrace, TraceFormatError

__all__ = [
    "AccessReport",
    "COUNTER_KEYS",
    "Image",
    "ImageDelta",
    "PRIMITIVE_KEYS",
    "Pipeline",
    "RaySampleBatch",
    "RenderOptions",
    "STEP_KEYS",
    "SamplePoint",
    "SampleRange",
    "SpuPrimitives",
    "StepTrace",
    "TraceFormatError",
    "compare_access_counts",
    "compare_images",
    "locate_cells",
    "locate_points_rt",
    "locate_points_uniform",
    "read_rgb8",
    "render",
    "write_image",
    "write_png",
    "write_ppm",
]
