"""Octant tiling of the scene box and view-dependent octant ordering."""

from __future__ import annotations

import numpy as np

from scene.models import SceneBounds


def octant_boxes(bounds: SceneBounds) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Boxes of the eight octants split at the bounds midpoint.

    Octant ``k = bx + 2 * by + 4 * bz`` where ``b`` is 1 on the upper half of an axis.
    """
    lo, mid, hi = bounds.lo, bounds.midpoint, bounds.hi
    boxes = []
    for k in range(8):
        upper = np.array([(k >> axis) & 1 for axis in range(3)], dtype=bool)
        boxes.append((np.where(upper, mid, lo), np.where(upper, hi, mid)))
    return boxes


def octant_distances(bounds: SceneBounds, view_origin) -> np.ndarray:
    """Euclidean distance from ``view_origin`` to the closest point of each octant."""
    point = np.asarray(view_origin, dtype=np.float64)
    out = np.empty(8)
    for k, (lo, hi) in enumerate(octant_boxes(bounds)):
        gap = np.maximum(np.maximum(lo - point, point - hi), 0.0)
        out[k] = float(np.sqrt(gap @ gap))
    return out


def octant_order(bounds: SceneBounds, view_origin) -> list[int]:
    """Octant indices sorted by distance from the view origin; ties keep the lower index."""
    distances = octant_distances(bounds, view_origin)
    return [int(k) for k in np.argsort(distances, kind="stable")]


def octant_of_points(bounds: SceneBounds, points: np.ndarray) -> np.ndarray:
    """Octant index of each point; points on the midpoint plane go to the upper half."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    upper = points >= bounds.midpoint
    return (upper[:, 0] * 1 + upper[:, 1] * 2 + upper[:, 2] * 4).astype(np.int64)
