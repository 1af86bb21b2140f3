"""
Decomposed-grid field evaluation: density, appearance features and the MLP head.

All arithmetic runs in float64 on exact promotions of the float32 factors,
summing rank-major and then in mode order X, Y, Z. Every operation is
elementwise over samples, so a sample's result does not depend on which
batch it was evaluated in.
"""

from __future__ import annotations

import logging

import numpy as np

from scene.models import AppearanceHead, Scene, VMDecomposition

logger = logging.getLogger(__name__)


class IndexOutOfRangeError(IndexError):
    """A grid index lies outside the factor resolution."""


def _as_index_arrays(decomp: VMDecomposition, cells) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 3)
    res = np.asarray(decomp.resolution)
    bad = np.any((cells < 0) | (cells >= res), axis=1)
    if bad.any():
        first = tuple(int(v) for v in cells[np.flatnonzero(bad)[0]])
        raise IndexOutOfRangeError(f"index {first} outside resolution {decomp.resolution}")
    return cells[:, 0], cells[:, 1], cells[:, 2]


def raw_densities(decomp: VMDecomposition, cells) -> np.ndarray:
    """Raw decomposed density sums for ``(M, 3)`` cell indices."""
    xs, ys, zs = _as_index_arrays(decomp, cells)
    return decomp.density.product_sum(xs, ys, zs)


def densities(decomp: VMDecomposition, cells) -> np.ndarray:
    """Non-negative densities for ``(M, 3)`` cell indices."""
    return decomp.activation.apply(raw_densities(decomp, cells))


def raw_density(decomp: VMDecomposition, index: tuple[int, int, int]) -> float:
    return float(raw_densities(decomp, [index])[0])


def density_at(decomp: VMDecomposition, index: tuple[int, int, int]) -> float:
    """
    Density at one grid index.

    Raises:
        IndexOutOfRangeError: If the index is outside the grid.
    """
    return float(densities(decomp, [index])[0])


def appearance_features(decomp: VMDecomposition, cells) -> np.ndarray:
    """
    Concatenated per-channel mode products, ``(M, 3 * R * C)``.

    Columns are ordered by rank, then mode X, Y, Z, then channel.
    """
    xs, ys, zs = _as_index_arrays(decomp, cells)
    f = decomp.appearance.as_float64
    columns = []
    for r in range(decomp.rank):
        columns.append(f["v_x"][r][:, xs] * f["m_yz"][r][:, ys, zs])
        columns.append(f["v_y"][r][:, ys] * f["m_xz"][r][:, xs, zs])
        columns.append(f["v_z"][r][:, zs] * f["m_xy"][r][:, xs, ys])
    return np.concatenate(columns, axis=0).T.copy()


def encode_direction(directions: np.ndarray, degree: int) -> np.ndarray:
    """Positional encoding ``[d, sin(2^l pi d), cos(2^l pi d)]`` for ``l < degree``."""
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    parts = [directions]
    for level in range(degree):
        scaled = (2.0**level) * np.pi * directions
        parts.append(np.sin(scaled))
        parts.append(np.cos(scaled))
    return np.concatenate(parts, axis=1)


def evaluate_head(head: AppearanceHead, inputs: np.ndarray) -> np.ndarray:
    """Run the MLP with an ordered per-input accumulation; tanh hidden, sigmoid output."""
    weights, biases = head.as_float64
    x = np.asarray(inputs, dtype=np.float64).reshape(-1, head.input_width)
    last = len(weights) - 1
    for layer, (w, b) in enumerate(zip(weights, biases)):
        out = np.empty((x.shape[0], w.shape[1]))
        out[:] = b
        for i in range(w.shape[0]):
            out += x[:, i : i + 1] * w[i]
        x = np.tanh(out) if layer < last else 1.0 / (1.0 + np.exp(-out))
    return x


def colors(
    decomp: VMDecomposition, head: AppearanceHead, cells, directions: np.ndarray
) -> np.ndarray:
    """View-dependent colors ``(M, C)`` in [0, 1]."""
    features = appearance_features(decomp, cells)
    encoded = encode_direction(directions, head.direction_degree)
    return evaluate_head(head, np.concatenate([features, encoded], axis=1))


def appearance_at(
    decomp: VMDecomposition,
    index: tuple[int, int, int],
    direction,
    *,
    head: AppearanceHead,
) -> np.ndarray:
    """
    Color at one grid index seen along a unit direction.

    Raises:
        IndexOutOfRangeError: If the index is outside the grid.
        ValueError: If ``direction`` is not unit length.
    """
    direction = np.asarray(direction, dtype=np.float64).reshape(1, 3)
    norm = float(np.sqrt((direction * direction).sum()))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be unit length, got norm {norm}")
    return colors(decomp, head, [index], direction)[0]


def shade(scene: Scene, cells, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Densities ``(M,)`` and colors ``(M, C)`` for samples of a scene."""
    return densities(scene.decomp, cells), colors(scene.decomp, scene.head, cells, directions)
