"""Scene, camera and matrix builders shared by the step modules."""

from __future__ import annotations

import numpy as np

from geometry import Camera, default_camera
from scene import (
    AppearanceHead,
    GeneratorSettings,
    ModeFactors,
    OccupancyGrid,
    Scene,
    VMDecomposition,
    generate_occluder_scene,
    generate_synthetic_scene,
)


def cached_scene(
    context,
    resolution: int,
    occupancy: float,
    rank: int = 4,
    channels: int = 3,
    seed: int | None = None,
    factor_sparsity: tuple[float, ...] = (0.0,),
) -> Scene:
    """Generate a blob scene once per parameter set for the whole run."""
    seed = context.config.scene_seed if seed is None else seed
    key = ("blobs", resolution, occupancy, rank, channels, seed, factor_sparsity)
    if key not in context.scene_cache:
        settings = GeneratorSettings(factor_sparsity=factor_sparsity)
        context.scene_cache[key] = generate_synthetic_scene(
            resolution, occupancy, rank, channels, seed, settings
        )
    return context.scene_cache[key]


def cached_occluder(context, resolution: int) -> Scene:
    key = ("occluder", resolution)
    if key not in context.scene_cache:
        context.scene_cache[key] = generate_occluder_scene(resolution, seed=context.config.scene_seed)
    return context.scene_cache[key]


def random_factors(
    rng: np.random.Generator, rank: int, channels: int, resolution: tuple[int, int, int]
) -> ModeFactors:
    nx, ny, nz = resolution
    return ModeFactors(
        v_x=rng.normal(size=(rank, channels, nx)).astype(np.float32),
        v_y=rng.normal(size=(rank, channels, ny)).astype(np.float32),
        v_z=rng.normal(size=(rank, channels, nz)).astype(np.float32),
        m_yz=rng.normal(size=(rank, channels, ny, nz)).astype(np.float32),
        m_xz=rng.normal(size=(rank, channels, nx, nz)).astype(np.float32),
        m_xy=rng.normal(size=(rank, channels, nx, ny)).astype(np.float32),
    )


def random_decomposition(rng: np.random.Generator) -> VMDecomposition:
    """Small decomposition with random resolution, rank and channel count."""
    resolution = tuple(int(n) for n in rng.integers(5, 8, size=3))
    rank = int(rng.integers(1, 4))
    channels = int(rng.integers(1, 4))
    return VMDecomposition(
        random_factors(rng, rank, 1, resolution),
        random_factors(rng, rank, channels, resolution),
    )


def constant_scene(
    resolution: int,
    density_value: float,
    color_bias: float = 0.0,
    rank: int = 1,
    channels: int = 3,
    full: bool = True,
) -> Scene:
    """
    Scene with every raw density equal to ``density_value`` and a constant head.

    Each rank contributes three products of ones, so factors hold
    ``sqrt(density_value / (3 * rank))``.
    """
    res = (resolution,) * 3
    ones = ModeFactors.zeros(rank, 1, res)
    value = np.sqrt(density_value / (3 * rank)) if density_value > 0 else 0.0
    density = ones.replace(**{
        name: np.full(getattr(ones, name).shape, value) for name in ("v_x", "v_y", "v_z", "m_yz", "m_xz", "m_xy")
    })
    appearance = ModeFactors.zeros(rank, channels, res)
    decomp = VMDecomposition(density, appearance)
    head = AppearanceHead.constant(decomp.feature_width + 3 + 6 * 2, channels, color_bias, hidden=(8,))
    grid = OccupancyGrid.full(res) if full else OccupancyGrid.empty(res)
    return Scene(grid, decomp, head, seed=0)


def front_camera(scene: Scene, size: int) -> Camera:
    return default_camera(scene.bounds, size, size)


def random_look_at(rng: np.random.Generator, size: int) -> Camera:
    """Camera somewhere on a shell around the origin, looking near it."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    position = direction * rng.uniform(4.0, 8.0)
    target = rng.uniform(-1.0, 1.0, size=3)
    return Camera.look_at(position, target, float(rng.uniform(30.0, 90.0)), size, size)


def sparse_matrix(
    rng: np.random.Generator, rows: int, cols: int, zeros: int, dtype=np.float32
) -> np.ndarray:
    """Matrix with exactly ``zeros`` zero entries and non-zero values elsewhere."""
    values = rng.uniform(0.5, 2.0, size=rows * cols) * rng.choice([-1.0, 1.0], size=rows * cols)
    values[rng.permutation(rows * cols)[:zeros]] = 0.0
    return values.reshape(rows, cols).astype(dtype)
