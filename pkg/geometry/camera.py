"""Pinhole camera model and pixel-to-ray mapping."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class PixelOutOfRangeError(ValueError):
    """A pixel coordinate lies outside the image."""


@dataclass(frozen=True)
class Ray:
    """A ray ``o + t d`` with unit direction."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        direction = np.asarray(self.direction, dtype=np.float64).reshape(3)
        norm = float(np.sqrt(direction @ direction))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be unit length, got norm {norm}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(frozen=True, eq=False)
class Camera:
    """
    Pinhole camera. Camera space looks along +z with image x to the right
    and image y down; ``rotation`` maps camera to world coordinates.
    """

    origin: np.ndarray
    rotation: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        err = np.abs(rotation.T @ rotation - np.eye(3)).max()
        if err > 1e-6:
            raise ValueError(f"rotation is not orthonormal (error {err:.3g})")
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "rotation", rotation)
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @classmethod
    def look_at(
        cls,
        position,
        target,
        fov_deg: float,
        width: int,
        height: int,
        up=(0.0, 1.0, 0.0),
    ) -> "Camera":
        """
        Build a camera at ``position`` looking at ``target``.

        Args:
            position: Camera centre in world coordinates.
            target: Point the optical axis passes through.
            fov_deg: Horizontal field of view in degrees, in (0, 180).
            width: Image width in pixels.
            height: Image height in pixels.
            up: World up vector; a fallback is used when it is parallel to the view.

        Returns:
            The camera, with square pixels and the principal point at the image centre.
        """
        if not 0.0 < fov_deg < 180.0:
            raise ValueError(f"fov_deg must lie in (0, 180), got {fov_deg}")
        position = np.asarray(position, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - position
        length = np.linalg.norm(forward)
        if length == 0.0:
            raise ValueError("camera position and target coincide")
        forward /= length
        up = np.asarray(up, dtype=np.float64)
        right = np.cross(forward, up)
        if np.linalg.norm(right) < 1e-9:
            right = np.cross(forward, (0.0, 0.0, 1.0))
            if np.linalg.norm(right) < 1e-9:
                right = np.cross(forward, (1.0, 0.0, 0.0))
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rotation = np.column_stack([right, down, forward])
        focal = 0.5 * width / np.tan(np.radians(fov_deg) / 2.0)
        return cls(position, rotation, focal, focal, width / 2.0, height / 2.0, width, height)

    @property
    def forward(self) -> np.ndarray:
        return self.rotation[:, 2]

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.origin) @ self.rotation

    def directions_for(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Unit world directions through pixel centres; elementwise, so any batch gives identical rows."""
        px = np.asarray(px, dtype=np.float64)
        py = np.asarray(py, dtype=np.float64)
        u = (px + 0.5 - self.cx) / self.fx
        v = (py + 0.5 - self.cy) / self.fy
        rot = self.rotation
        wx = u * rot[0, 0] + v * rot[0, 1] + rot[0, 2]
        wy = u * rot[1, 0] + v * rot[1, 1] + rot[1, 2]
        wz = u * rot[2, 0] + v * rot[2, 1] + rot[2, 2]
        norm = np.sqrt(wx * wx + wy * wy + wz * wz)
        return np.stack([wx / norm, wy / norm, wz / norm], axis=-1)

    @cached_property
    def directions(self) -> np.ndarray:
        """``(H * W, 3)`` pixel directions, row-major with flat pixel id ``py * W + px``."""
        py, px = np.divmod(np.arange(self.num_pixels), self.width)
        dirs = self.directions_for(px, py)
        dirs.flags.writeable = False
        return dirs


def pixel_to_ray(camera: Camera, px: float, py: float) -> Ray:
    """
    Ray through the centre of pixel ``(px, py)``.

    Raises:
        PixelOutOfRangeError: If the pixel lies outside the image.
    """
    if not (0 <= px < camera.width and 0 <= py < camera.height):
        raise PixelOutOfRangeError(
            f"pixel ({px}, {py}) outside {camera.width}x{camera.height} image"
        )
    direction = camera.directions_for(np.array([px]), np.array([py]))[0]
    return Ray(camera.origin.copy(), direction)


def default_camera(bounds, width: int = 128, height: int = 128, fov_deg: float = 40.0) -> Camera:
    """Camera in front of the ``z = min`` face looking at the box centre along +z."""
    center = bounds.midpoint
    extent = bounds.extent
    half_fov = np.radians(fov_deg) / 2.0
    distance = 0.6 * float(max(extent[0], extent[1])) / np.tan(half_fov) + 0.5 * float(extent[2])
    position = center - np.array([0.0, 0.0, distance])
    return Camera.look_at(position, center, fov_deg, width, height)
