"""Cube-to-ball approximation, ball projection and analytic ray intersections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from geometry.camera import Camera, Ray
from scene.models import OccupancyGrid

# Membership threshold slack; keeps the cone test conservative against rounding.
CONE_EPSILON = 1e-9


class CellNotOccupiedError(ValueError):
    """A ball was requested for an empty or out-of-range cell."""


@dataclass(frozen=True)
class Ball:
    """Circumscribed ball of an occupied grid cell."""

    center: np.ndarray
    radius: float
    source_cell: tuple[int, int, int]

    def __post_init__(self) -> None:
        if not self.radius > 0.0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "source_cell", tuple(int(c) for c in self.source_cell))


@dataclass(frozen=True)
class PixelRegion:
    """
    Pixels whose rays may hit a ball: an inclusive bounding box plus a cone test.

    A pixel is a member when ``dot(d, axis) >= cos_threshold``. ``covers_all``
    marks the degenerate case of a camera inside the ball, where every pixel
    is a member.
    """

    x0: int
    y0: int
    x1: int
    y1: int
    axis: np.ndarray
    cos_threshold: float
    covers_all: bool = False

    def __post_init__(self) -> None:
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"empty pixel box ({self.x0},{self.y0})-({self.x1},{self.y1})")
        if not self.covers_all and not 0.0 < self.cos_threshold <= 1.0:
            raise ValueError(f"cos_threshold must lie in (0, 1], got {self.cos_threshold}")

    def member_mask(self, camera: Camera) -> np.ndarray:
        """Boolean ``(y1 - y0 + 1, x1 - x0 + 1)`` membership over the box."""
        h = self.y1 - self.y0 + 1
        w = self.x1 - self.x0 + 1
        if self.covers_all:
            return np.ones((h, w), dtype=bool)
        ids = box_pixel_ids(camera, self.x0, self.y0, self.x1, self.y1)
        dirs = camera.directions[ids.ravel()]
        cosines = dirs[:, 0] * self.axis[0] + dirs[:, 1] * self.axis[1] + dirs[:, 2] * self.axis[2]
        return (cosines >= self.cos_threshold).reshape(h, w)

    def member_pixels(self, camera: Camera) -> np.ndarray:
        """Flat pixel ids (``py * W + px``) of the members, ascending."""
        ids = box_pixel_ids(camera, self.x0, self.y0, self.x1, self.y1)
        return ids[self.member_mask(camera)]

    def contains(self, camera: Camera, px: int, py: int) -> bool:
        if not (self.x0 <= px <= self.x1 and self.y0 <= py <= self.y1):
            return False
        return bool(self.member_mask(camera)[py - self.y0, px - self.x0])


def box_pixel_ids(camera: Camera, x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    ys = np.arange(y0, y1 + 1)
    xs = np.arange(x0, x1 + 1)
    return ys[:, None] * camera.width + xs[None, :]


def ball_radius(grid: OccupancyGrid) -> float:
    """Half the cell diagonal; identical for every cell of a grid."""
    side = grid.cell_size
    return 0.5 * float(np.sqrt(side @ side))


def cube_to_ball(cell_index: tuple[int, int, int], grid: OccupancyGrid) -> Ball:
    """
    Circumscribed ball of an occupied cell.

    Raises:
        CellNotOccupiedError: If the cell is out of range or empty.
    """
    if not grid.is_occupied(cell_index):
        raise CellNotOccupiedError(f"cell {tuple(cell_index)} is not occupied")
    center = grid.cell_centers(np.asarray(cell_index))[0]
    return Ball(center, ball_radius(grid), cell_index)


def _full_region(camera: Camera, axis: np.ndarray, cos_threshold: float, covers_all: bool) -> PixelRegion:
    return PixelRegion(0, 0, camera.width - 1, camera.height - 1, axis, cos_threshold, covers_all)


def _tangent_range(a: float, z: float, radius: float, focal: float, centre: float) -> tuple[float, float]:
    """Image-coordinate interval spanned by the ball along one image axis."""
    phi = np.arctan2(a, z)
    psi = np.arcsin(min(1.0, radius / np.hypot(a, z)))
    return centre + focal * np.tan(phi - psi), centre + focal * np.tan(phi + psi)


def project_ball(camera: Camera, ball: Ball) -> PixelRegion | None:
    """
    Project a ball to the image as a cone-membership region.

    Returns:
        The region, tightened to its members, or None when no pixel centre
        sees the ball. A camera inside the ball yields a full-image region.
    """
    offset = ball.center - camera.origin
    dist = float(np.sqrt(offset @ offset))
    r = ball.radius
    if dist <= r:
        return _full_region(camera, camera.forward.copy(), 0.0, covers_all=True)
    if float(camera.forward @ offset) < -r:
        return None

    axis = offset / dist
    cos_threshold = float(np.sqrt(1.0 - (r / dist) ** 2)) - CONE_EPSILON
    x_cam, y_cam, z_cam = camera.world_to_camera(ball.center)
    if z_cam <= r:
        x0, y0, x1, y1 = 0, 0, camera.width - 1, camera.height - 1
    else:
        u_lo, u_hi = _tangent_range(x_cam, z_cam, r, camera.fx, camera.cx)
        v_lo, v_hi = _tangent_range(y_cam, z_cam, r, camera.fy, camera.cy)
        x0 = max(0, int(np.floor(u_lo - 0.5)) - 1)
        x1 = min(camera.width - 1, int(np.ceil(u_hi - 0.5)) + 1)
        y0 = max(0, int(np.floor(v_lo - 0.5)) - 1)
        y1 = min(camera.height - 1, int(np.ceil(v_hi - 0.5)) + 1)
        if x0 > x1 or y0 > y1:
            return None

    candidate = PixelRegion(x0, y0, x1, y1, axis, max(cos_threshold, np.nextafter(0.0, 1.0)))
    mask = candidate.member_mask(camera)
    if not mask.any():
        return None
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return PixelRegion(
        x0 + int(cols[0]),
        y0 + int(rows[0]),
        x0 + int(cols[-1]),
        y0 + int(rows[-1]),
        axis,
        candidate.cos_threshold,
    )


def intersect_spheres(
    origin: np.ndarray, directions: np.ndarray, centers: np.ndarray, radius: float | np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized line-sphere intersection for unit directions.

    Args:
        origin: ``(3,)`` or ``(M, 3)`` ray origins.
        directions: ``(M, 3)`` unit directions.
        centers: ``(3,)`` or ``(M, 3)`` sphere centres.
        radius: Scalar or ``(M,)`` radii.

    Returns:
        ``(hit, t_near, t_far)``; ``t_near`` is clamped at zero and both are
        NaN where ``hit`` is False.
    """
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    oc = np.broadcast_to(np.asarray(centers, dtype=np.float64) - np.asarray(origin, dtype=np.float64), directions.shape)
    m = directions[:, 0] * oc[:, 0] + directions[:, 1] * oc[:, 1] + directions[:, 2] * oc[:, 2]
    radius = np.asarray(radius, dtype=np.float64)
    q = oc[:, 0] * oc[:, 0] + oc[:, 1] * oc[:, 1] + oc[:, 2] * oc[:, 2] - radius * radius
    disc = m * m - q
    root = np.sqrt(np.where(disc >= 0.0, disc, 0.0))
    t_far = m + root
    hit = (disc >= 0.0) & (t_far >= 0.0)
    t_near = np.maximum(m - root, 0.0)
    return hit, np.where(hit, t_near, np.nan), np.where(hit, t_far, np.nan)


def ray_sphere_intersect(ray: Ray, ball: Ball) -> tuple[float, float] | None:
    """Entry and exit distances of a ray through a ball, or None on a miss."""
    hit, t_near, t_far = intersect_spheres(ray.origin, ray.direction[None, :], ball.center, ball.radius)
    if not hit[0]:
        return None
    return float(t_near[0]), float(t_far[0])


def clip_to_boxes(
    origin: np.ndarray, directions: np.ndarray, box_lo: np.ndarray, box_hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Slab test of rays against axis-aligned boxes.

    Returns:
        ``(t_enter, t_exit)`` per ray; the ray misses where ``t_enter > t_exit``.
        Negative distances are not clamped.
    """
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    origin = np.broadcast_to(np.asarray(origin, dtype=np.float64), directions.shape)
    lo = np.broadcast_to(np.asarray(box_lo, dtype=np.float64), directions.shape)
    hi = np.broadcast_to(np.asarray(box_hi, dtype=np.float64), directions.shape)
    parallel = directions == 0.0
    safe = np.where(parallel, 1.0, directions)
    t1 = (lo - origin) / safe
    t2 = (hi - origin) / safe
    near = np.minimum(t1, t2)
    far = np.maximum(t1, t2)
    inside = (origin >= lo) & (origin <= hi)
    near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
    far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
    return near.max(axis=1), far.min(axis=1)
