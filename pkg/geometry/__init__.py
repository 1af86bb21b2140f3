"""Camera, sphere and octant geometry."""

from .camera import Camera, PixelOutOfRangeError, Ray, default_camera, pixel_to_ray
from .octants import octant_boxes, octant_distances, octant_of_points, octant_order
from .spheres import (
    Ball,
    CellNotOccupiedError,
    PixelRegion,
    ball_radius,
    clip_to_boxes,
    cube_to_ball,
    intersect_spheres,
    project_ball,
    ray_sphere_intersect,
)

__all__ = [
    "Ball",
    "Camera",
    "CellNotOccupiedError",
    "PixelOutOfRangeError",
    "PixelRegion",
    "Ray",
    "ball_radius",
    "clip_to_boxes",
    "cube_to_ball",
    "default_camera",
    "intersect_spheres",
    "octant_boxes",
    "octant_distances",
    "octant_of_points",
    "octant_order",
    "pixel_to_ray",
    "project_ball",
    "ray_sphere_intersect",
]
