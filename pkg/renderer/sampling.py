"""Point location: uniform ray marching and geometry-driven location over occupied cells."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from geometry.camera import Camera
from geometry.octants import octant_of_points, octant_order
from geometry.spheres import ball_radius, clip_to_boxes, cube_to_ball, intersect_spheres, project_ball
from renderer.trace import StepTrace
from scene.models import OccupancyGrid

logger = logging.getLogger(__name__)

UNIFORM_CHUNK_PIXELS = 4096


class SampleRange(Enum):
    """Ray interval the uniform pipeline samples."""

    BOUNDS = "bounds"
    OCCUPIED = "occupied"


@dataclass(frozen=True)
class SamplePoint:
    """One located point: distance along the ray, segment length and grid index."""

    t: float
    delta: float
    cell: tuple[int, int, int]


@dataclass(eq=False)
class RaySampleBatch:
    """
    Located samples for a whole image, sorted by pixel, then ``t``, then flat cell index.

    Within a pixel ``t`` is strictly increasing.
    """

    camera: Camera
    pixel: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    cells: np.ndarray
    flat_cell: np.ndarray

    @classmethod
    def build(
        cls,
        camera: Camera,
        grid: OccupancyGrid,
        pixel: np.ndarray,
        t: np.ndarray,
        delta: np.ndarray,
        cells: np.ndarray,
    ) -> "RaySampleBatch":
        """Sort samples canonically and drop repeated ``(pixel, t)`` entries, keeping the lowest cell."""
        pixel = np.asarray(pixel, dtype=np.int64)
        t = np.asarray(t, dtype=np.float64)
        delta = np.asarray(delta, dtype=np.float64)
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 3)
        flat = grid.flat_index(cells)
        order = np.lexsort((flat, t, pixel))
        pixel, t, delta, cells, flat = pixel[order], t[order], delta[order], cells[order], flat[order]
        keep = np.ones(pixel.shape[0], dtype=bool)
        keep[1:] = (pixel[1:] != pixel[:-1]) | (t[1:] != t[:-1])
        return cls(camera, pixel[keep], t[keep], delta[keep], cells[keep], flat[keep])

    @classmethod
    def empty(cls, camera: Camera) -> "RaySampleBatch":
        return cls(
            camera,
            np.zeros(0, dtype=np.int64),
            np.zeros(0),
            np.zeros(0),
            np.zeros((0, 3), dtype=np.int64),
            np.zeros(0, dtype=np.int64),
        )

    @property
    def size(self) -> int:
        return int(self.pixel.shape[0])

    @property
    def directions(self) -> np.ndarray:
        return self.camera.directions[self.pixel]

    def points(self) -> np.ndarray:
        return self.camera.origin + self.t[:, None] * self.directions

    def counts_per_pixel(self) -> np.ndarray:
        return np.bincount(self.pixel, minlength=self.camera.num_pixels)

    def samples_for_pixel(self, pixel: int) -> list[SamplePoint]:
        lo, hi = np.searchsorted(self.pixel, [pixel, pixel + 1])
        return [
            SamplePoint(float(self.t[i]), float(self.delta[i]), tuple(int(c) for c in self.cells[i]))
            for i in range(lo, hi)
        ]

    def cell_sets(self) -> dict[int, set[int]]:
        """Flat cell indices touched per pixel."""
        out: dict[int, set[int]] = {}
        for p, c in zip(self.pixel.tolist(), self.flat_cell.tolist()):
            out.setdefault(p, set()).add(c)
        return out


@dataclass(frozen=True)
class LocatedSamples:
    """Unsorted sample arrays produced by one location pass."""

    pixel: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    cells: np.ndarray

    @classmethod
    def empty(cls) -> "LocatedSamples":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0), np.zeros((0, 3), dtype=np.int64))

    @classmethod
    def concat(cls, parts: list["LocatedSamples"]) -> "LocatedSamples":
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.pixel for p in parts]),
            np.concatenate([p.t for p in parts]),
            np.concatenate([p.delta for p in parts]),
            np.concatenate([p.cells for p in parts]),
        )


def uniform_interval(camera: Camera, grid: OccupancyGrid, sample_range: SampleRange) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel ``[t0, t1]`` sampled by the uniform pipeline; empty where ``t1 <= t0``."""
    box = grid.bounds if sample_range is SampleRange.BOUNDS else grid.occupied_bounds()
    if box is None:
        zeros = np.zeros(camera.num_pixels)
        return zeros, zeros
    t_enter, t_exit = clip_to_boxes(camera.origin, camera.directions, box.lo, box.hi)
    return np.maximum(t_enter, 0.0), t_exit


def locate_points_uniform(
    camera: Camera,
    grid: OccupancyGrid,
    n_samples: int,
    sample_range: SampleRange = SampleRange.BOUNDS,
) -> tuple[RaySampleBatch, StepTrace]:
    """
    Sample every ray at ``n_samples`` midpoints and keep the ones in occupied cells.

    Every candidate point costs one occupancy access, so the trace records
    exactly ``H * W * n_samples`` accesses whatever the grid holds.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    trace = StepTrace()
    num_pixels = camera.num_pixels
    trace.occupancy_accesses = num_pixels * n_samples
    trace.spu_primitives.ray_gen = num_pixels
    trace.spu_primitives.point_query = num_pixels * n_samples

    t0, t1 = uniform_interval(camera, grid, sample_range)
    valid = t1 > t0
    step = np.where(valid, (t1 - t0) / n_samples, 0.0)
    offsets = np.arange(n_samples) + 0.5
    dirs = camera.directions
    parts = []
    for start in range(0, num_pixels, UNIFORM_CHUNK_PIXELS):
        pix = np.arange(start, min(start + UNIFORM_CHUNK_PIXELS, num_pixels))
        pix = pix[valid[pix]]
        if pix.size == 0:
            continue
        ts = t0[pix, None] + offsets[None, :] * step[pix, None]
        points = camera.origin + ts[..., None] * dirs[pix, None, :]
        cells, inside = grid.quantize(points.reshape(-1, 3))
        occupied = np.zeros(inside.shape[0], dtype=bool)
        hit = cells[inside]
        occupied[inside] = grid.bits[hit[:, 0], hit[:, 1], hit[:, 2]]
        if not occupied.any():
            continue
        pixel = np.repeat(pix, n_samples)[occupied]
        parts.append(
            LocatedSamples(pixel, ts.reshape(-1)[occupied], step[pixel], cells[occupied])
        )
    located = LocatedSamples.concat(parts)
    batch = RaySampleBatch.build(camera, grid, located.pixel, located.t, located.delta, located.cells)
    trace.points_located = batch.size
    logger.debug("Uniform location kept %d of %d candidate points", batch.size, trace.occupancy_accesses)
    return batch, trace


def overlap_offsets(grid: OccupancyGrid) -> np.ndarray:
    """Cell offsets whose circumscribed balls can overlap the ball of the centre cell."""
    size = grid.cell_size
    reach = 2.0 * ball_radius(grid)
    span = [np.arange(-int(reach // s), int(reach // s) + 1) for s in size]
    offsets = np.stack(np.meshgrid(*span, indexing="ij"), axis=-1).reshape(-1, 3)
    dist = np.linalg.norm(offsets * size, axis=1)
    return offsets[(dist > 0.0) & (dist < reach)]


def clip_to_nearest_cell(
    grid: OccupancyGrid,
    origin: np.ndarray,
    directions: np.ndarray,
    owners: np.ndarray,
    centers: np.ndarray,
    start: np.ndarray,
    end: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Shrink ball segments to the points whose nearest occupied cell centre is the owner.

    A point inside the owner's ball that lies nearer another occupied centre
    is also inside that centre's ball, so the clipped segments of one ray are
    disjoint and still cover the union of its ball chords.

    Args:
        grid: Occupancy grid the owners belong to.
        origin: ``(3,)`` ray origin.
        directions: ``(M, 3)`` unit directions, one per segment.
        owners: ``(M, 3)`` cell index producing each segment.
        centers: ``(M, 3)`` owner cell centres.
        start: ``(M,)`` segment starts.
        end: ``(M,)`` segment ends.
    """
    start, end = start.copy(), end.copy()
    res = np.asarray(grid.resolution)
    size = grid.cell_size
    for offset in overlap_offsets(grid):
        other = owners + offset
        inside = np.all((other >= 0) & (other < res), axis=1)
        rival = np.zeros(owners.shape[0], dtype=bool)
        hit = other[inside]
        rival[inside] = grid.bits[hit[:, 0], hit[:, 1], hit[:, 2]]
        if not rival.any():
            continue
        # bisector plane: (p - mid) . normal <= 0 keeps the owner side
        normal = offset * size
        mid = centers[rival] + 0.5 * normal
        num = (origin - mid) @ normal
        den = directions[rival] @ normal
        cut = np.divide(-num, den, out=np.zeros_like(den), where=den != 0.0)
        idx = np.flatnonzero(rival)
        end[idx] = np.where(den > 0.0, np.minimum(end[idx], cut), end[idx])
        start[idx] = np.where(den < 0.0, np.maximum(start[idx], cut), start[idx])
        end[idx] = np.where((den == 0.0) & (num > 0.0), start[idx], end[idx])
    return start, end


def locate_cells(
    camera: Camera,
    grid: OccupancyGrid,
    cells: np.ndarray,
    exact: bool,
    trace: StepTrace,
    active: np.ndarray | None = None,
) -> LocatedSamples:
    """
    Geometry-driven location for a set of occupied cells.

    Each cell is approximated by its circumscribed ball, projected to a pixel
    region, and intersected analytically with the member rays. Exact mode
    clips every segment to the cube; otherwise overlapping balls split a ray
    by nearest occupied cell centre, so no stretch of it is shaded twice.
    Segments are sampled at midpoints of sub-intervals of half the smallest
    cell side; the last one is clipped.

    Args:
        camera: The rendering camera.
        grid: Occupancy grid the cells belong to.
        cells: ``(K, 3)`` occupied cell indices.
        exact: Clip ball segments to the cube.
        trace: Receives primitive counts.
        active: Optional per-pixel mask; inactive pixels are skipped.
    """
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 3)
    pair_pixels, pair_cells = [], []
    for i, cell in enumerate(cells):
        ball = cube_to_ball(tuple(cell), grid)
        trace.spu_primitives.ball_approx += 1
        trace.spu_primitives.projection += 1
        region = project_ball(camera, ball)
        if region is None:
            continue
        members = region.member_pixels(camera)
        if active is not None:
            members = members[active[members]]
        if members.size:
            pair_pixels.append(members)
            pair_cells.append(np.full(members.size, i, dtype=np.int64))
    if not pair_pixels:
        return LocatedSamples.empty()

    pixels = np.concatenate(pair_pixels)
    owner = np.concatenate(pair_cells)
    trace.spu_primitives.intersection += int(pixels.size)
    dirs = camera.directions[pixels]
    centers = grid.cell_centers(cells)[owner]
    hit, t_near, t_far = intersect_spheres(camera.origin, dirs, centers, ball_radius(grid))
    if exact:
        lo, hi = grid.cell_boxes(cells[owner])
        t_enter, t_exit = clip_to_boxes(camera.origin, dirs, lo, hi)
        start = np.maximum(t_near, t_enter)
        end = np.minimum(t_far, t_exit)
    else:
        start, end = clip_to_nearest_cell(
            grid, camera.origin, dirs, cells[owner], centers, t_near, t_far
        )
    keep = hit & (end > start)
    pixels, owner, start, end = pixels[keep], owner[keep], start[keep], end[keep]
    if pixels.size == 0:
        return LocatedSamples.empty()

    spacing = 0.5 * float(grid.cell_size.min())
    counts = np.maximum(1, np.ceil((end - start) / spacing).astype(np.int64))
    seg = np.repeat(np.arange(pixels.size), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(seg.size) - first[seg]
    lo_t = start[seg] + k * spacing
    hi_t = np.minimum(lo_t + spacing, end[seg])
    delta = hi_t - lo_t
    ok = delta > 0.0
    return LocatedSamples(
        pixels[seg][ok],
        (0.5 * (lo_t + hi_t))[ok],
        delta[ok],
        cells[owner[seg]][ok],
    )


def cells_by_octant(grid: OccupancyGrid) -> dict[int, np.ndarray]:
    """Occupied cells grouped by the octant holding their centre, flat order within each."""
    cells = grid.occupied_cells()
    octants = octant_of_points(grid.bounds, grid.cell_centers(cells))
    return {k: cells[octants == k] for k in range(8)}


def locate_points_rt(
    camera: Camera,
    grid: OccupancyGrid,
    exact: bool = False,
    octant_ordering: bool = True,
) -> tuple[RaySampleBatch, StepTrace]:
    """
    Locate samples by looping over occupied cells only.

    With octant ordering, octants are visited nearest first and each
    non-empty octant costs one extra bookkeeping access, so accesses never
    exceed ``popcount + 8``.
    """
    trace = StepTrace()
    trace.spu_primitives.ray_gen = camera.num_pixels
    parts = []
    if octant_ordering:
        groups = cells_by_octant(grid)
        for k in octant_order(grid.bounds, camera.origin):
            if groups[k].shape[0] == 0:
                continue
            trace.occupancy_accesses += groups[k].shape[0] + 1
            parts.append(locate_cells(camera, grid, groups[k], exact, trace))
    else:
        cells = grid.occupied_cells()
        trace.occupancy_accesses = cells.shape[0]
        parts.append(locate_cells(camera, grid, cells, exact, trace))
    located = LocatedSamples.concat(parts)
    batch = RaySampleBatch.build(camera, grid, located.pixel, located.t, located.delta, located.cells)
    trace.points_located = batch.size
    logger.debug(
        "RT location visited %d cells, located %d points", trace.spu_primitives.ball_approx, batch.size
    )
    return batch, trace
