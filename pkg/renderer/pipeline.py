"""End-to-end render pipelines and the occupancy access comparison."""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from geometry.camera import Camera
from geometry.octants import octant_boxes, octant_order
from geometry.spheres import ball_radius, clip_to_boxes
from renderer.image_io import Image
from renderer.sampling import (
    LocatedSamples,
    RaySampleBatch,
    SampleRange,
    cells_by_octant,
    locate_cells,
    locate_points_rt,
    locate_points_uniform,
)
from renderer.trace import StepTrace
from scene.models import Scene
from shading.compositing import DEFAULT_TERMINATION_THRESHOLD, CompositeBatch, TransmittanceConvention
from shading.fields import appearance_features, densities, encode_direction, evaluate_head

logger = logging.getLogger(__name__)


class Pipeline(Enum):
    UNIFORM = "uniform"
    RT = "rt"


@dataclass(frozen=True)
class RenderOptions:
    """
    Knobs for :func:`render`.

    ``exact`` clips ball segments to cubes (rt only). ``octant_ordering``
    shades octant by octant, nearest first, skipping terminated pixels
    (rt only). ``n_samples`` and ``sample_range`` apply to the uniform
    pipeline.
    """

    pipeline: Pipeline = Pipeline.RT
    exact: bool = False
    threshold: float = DEFAULT_TERMINATION_THRESHOLD
    n_samples: int = 128
    sample_range: SampleRange = SampleRange.BOUNDS
    octant_ordering: bool = True
    convention: TransmittanceConvention = TransmittanceConvention.PRINTED

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError(f"threshold must lie in [0, 1), got {self.threshold}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {self.n_samples}")


class _Shader:
    """Buffers located samples and folds them per pixel in ascending ``t``."""

    def __init__(self, scene: Scene, camera: Camera, options: RenderOptions, trace: StepTrace) -> None:
        self.scene = scene
        self.camera = camera
        self.trace = trace
        self.state = CompositeBatch(
            camera.num_pixels, scene.decomp.channels, options.threshold, options.convention
        )
        self.pending = LocatedSamples.empty()

    def add(self, batch: RaySampleBatch) -> None:
        self.pending = LocatedSamples.concat(
            [self.pending, LocatedSamples(batch.pixel, batch.t, batch.delta, batch.cells)]
        )

    def release(self, bound: np.ndarray | None = None) -> None:
        """Fold every pending sample with ``t`` below its pixel's bound; all of them if None."""
        pending = self.pending
        alive = ~self.state.terminated[pending.pixel]
        if bound is None:
            ready = alive
        else:
            ready = alive & (pending.t < bound[pending.pixel])
        waiting = alive & ~ready
        self.pending = LocatedSamples(
            pending.pixel[waiting], pending.t[waiting], pending.delta[waiting], pending.cells[waiting]
        )
        if ready.any():
            batch = RaySampleBatch.build(
                self.camera,
                self.scene.grid,
                pending.pixel[ready],
                pending.t[ready],
                pending.delta[ready],
                pending.cells[ready],
            )
            self._fold(batch)

    def _fold(self, batch: RaySampleBatch) -> None:
        pixel = batch.pixel
        starts = np.flatnonzero(np.r_[True, pixel[1:] != pixel[:-1]])
        run = np.cumsum(np.r_[True, pixel[1:] != pixel[:-1]]) - 1
        slot = np.arange(pixel.size) - starts[run]
        by_slot = np.argsort(slot, kind="stable")
        bounds = np.r_[0, np.cumsum(np.bincount(slot))]
        decomp, head = self.scene.decomp, self.scene.head
        dirs = self.camera.directions
        for s in range(bounds.size - 1):
            idx = by_slot[bounds[s] : bounds[s + 1]]
            idx = idx[~self.state.terminated[pixel[idx]]]
            if idx.size == 0:
                break
            cells = batch.cells[idx]
            started = time.perf_counter()
            sigma = densities(decomp, cells)
            features = appearance_features(decomp, cells)
            self.trace.add_time("step2_2_grid", time.perf_counter() - started)

            started = time.perf_counter()
            inputs = np.concatenate(
                [features, encode_direction(dirs[pixel[idx]], head.direction_degree)], axis=1
            )
            rgb = evaluate_head(head, inputs)
            self.trace.add_time("step2_2_mlp", time.perf_counter() - started)

            started = time.perf_counter()
            self.state.fold(pixel[idx], sigma, batch.delta[idx], rgb)
            self.trace.add_time("step3", time.perf_counter() - started)
            self.trace.record_shading(int(idx.size), decomp.rank, decomp.channels, head.macs_per_sample)

    def image(self) -> Image:
        cam = self.camera
        return Image(self.state.color.reshape(cam.height, cam.width, -1).copy())


def _merge_location_trace(trace: StepTrace, located: StepTrace) -> None:
    trace.occupancy_accesses += located.occupancy_accesses
    trace.points_located += located.points_located
    for key, value in located.spu_primitives.to_dict().items():
        setattr(trace.spu_primitives, key, getattr(trace.spu_primitives, key) + value)


def _octant_entry_bounds(
    camera: Camera, scene: Scene, octants: list[int], active: np.ndarray
) -> np.ndarray:
    """Smallest distance at which each active ray can enter any of the given octants' ball-grown boxes."""
    bound = np.full(camera.num_pixels, np.inf)
    if not octants:
        return bound
    pix = np.flatnonzero(active)
    dirs = camera.directions[pix]
    grow = ball_radius(scene.grid)
    boxes = octant_boxes(scene.grid.bounds)
    for k in octants:
        lo, hi = boxes[k]
        t_enter, t_exit = clip_to_boxes(camera.origin, dirs, lo - grow, hi + grow)
        entry = np.maximum(t_enter, 0.0)
        entry = np.where(t_exit >= entry, entry, np.inf)
        bound[pix] = np.minimum(bound[pix], entry)
    return bound


def _render_rt_octants(scene: Scene, camera: Camera, options: RenderOptions, trace: StepTrace) -> Image:
    """
    Shade octant by octant. Samples are released for folding only once no
    later octant can still produce a smaller ``t`` on their ray, so the fold
    order equals one globally sorted pass.
    """
    grid = scene.grid
    shader = _Shader(scene, camera, options, trace)
    groups = cells_by_octant(grid)
    order = [k for k in octant_order(grid.bounds, camera.origin) if groups[k].shape[0]]
    trace.spu_primitives.ray_gen = camera.num_pixels
    for i, k in enumerate(order):
        started = time.perf_counter()
        trace.occupancy_accesses += groups[k].shape[0] + 1
        active = shader.state.active
        located = locate_cells(camera, grid, groups[k], options.exact, trace, active=active)
        batch = RaySampleBatch.build(camera, grid, located.pixel, located.t, located.delta, located.cells)
        trace.points_located += batch.size
        shader.add(batch)
        bound = _octant_entry_bounds(camera, scene, order[i + 1 :], active)
        trace.add_time("step2_1", time.perf_counter() - started)
        shader.release(bound)
        logger.debug(
            "Octant %d: %d cells, %d samples, %d pixels still active",
            k,
            groups[k].shape[0],
            batch.size,
            int(shader.state.active.sum()),
        )
    shader.release()
    return shader.image()


def render(
    scene: Scene,
    camera: Camera,
    options: RenderOptions | None = None,
    **overrides: Any,
) -> tuple[Image, StepTrace]:
    """
    Render a scene with the uniform or the rt pipeline.

    Args:
        scene: Scene to render.
        camera: Camera to render from.
        options: Render options; keyword overrides replace individual fields.

    Returns:
        The image and the instrumented step trace.
    """
    options = dataclasses.replace(options or RenderOptions(), **overrides)
    trace = StepTrace()

    started = time.perf_counter()
    _ = camera.directions
    trace.add_time("step1", time.perf_counter() - started)

    if options.pipeline is Pipeline.RT and options.octant_ordering:
        image = _render_rt_octants(scene, camera, options, trace)
    else:
        started = time.perf_counter()
        if options.pipeline is Pipeline.UNIFORM:
            batch, located = locate_points_uniform(
                camera, scene.grid, options.n_samples, options.sample_range
            )
        else:
            batch, located = locate_points_rt(camera, scene.grid, options.exact, octant_ordering=False)
        trace.add_time("step2_1", time.perf_counter() - started)
        _merge_location_trace(trace, located)
        shader = _Shader(scene, camera, options, trace)
        shader.add(batch)
        shader.release()
        image = shader.image()

    logger.info(
        "Rendered %dx%d with %s pipeline: %d located, %d shaded, %d occupancy accesses",
        camera.width,
        camera.height,
        options.pipeline.value,
        trace.points_located,
        trace.points_shaded,
        trace.occupancy_accesses,
    )
    return image, trace


@dataclass(frozen=True)
class AccessReport:
    """Occupancy-grid accesses of both pipelines for one view."""

    uniform_accesses: int
    rt_accesses: int
    popcount: int

    @property
    def ratio(self) -> float | None:
        """uniform / rt, or None when rt made no accesses."""
        if self.rt_accesses == 0:
            return None
        return self.uniform_accesses / self.rt_accesses

    def to_dict(self) -> dict[str, Any]:
        ratio = self.ratio
        return {
            "uniform_accesses": self.uniform_accesses,
            "rt_accesses": self.rt_accesses,
            "popcount": self.popcount,
            "ratio": "unbounded" if ratio is None else ratio,
        }


def compare_access_counts(scene: Scene, camera: Camera, n_uniform: int) -> AccessReport:
    """Run both location passes and report their occupancy access counts."""
    _, uniform = locate_points_uniform(camera, scene.grid, n_uniform)
    _, rt = locate_points_rt(camera, scene.grid)
    report = AccessReport(uniform.occupancy_accesses, rt.occupancy_accesses, scene.grid.popcount)
    logger.info("Access ratio uniform/rt: %s", report.to_dict()["ratio"])
    return report
