"""Procedural scene synthesis with controllable occupancy and factor sparsity."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from scene.models import (
    FACTOR_NAMES,
    AppearanceHead,
    DensityActivation,
    ModeFactors,
    OccupancyGrid,
    Scene,
    SceneBounds,
    VMDecomposition,
    direction_encoding_width,
)

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 8
OCCUPANCY_TOLERANCE = 0.10
DEFAULT_MAX_CELL_OPTICAL_DEPTH = 0.025


class OccupancyUnreachableError(ValueError):
    """The requested occupancy cannot be met at the grid resolution."""


@dataclass(frozen=True)
class GeneratorSettings:
    """Optional knobs for :func:`generate_synthetic_scene`."""

    factor_sparsity: tuple[float, ...] = (0.0,)
    max_cell_optical_depth: float = DEFAULT_MAX_CELL_OPTICAL_DEPTH
    direction_degree: int = 2
    hidden_widths: tuple[int, ...] = (64, 64)
    activation: DensityActivation = DensityActivation.SHIFTED_SOFTPLUS
    bounds: SceneBounds | None = None

    def __post_init__(self) -> None:
        if not self.factor_sparsity:
            raise ValueError("factor_sparsity needs at least one target")
        for s in self.factor_sparsity:
            if not 0.0 <= s < 1.0:
                raise ValueError(f"factor sparsity targets must lie in [0, 1), got {s}")
        if self.max_cell_optical_depth <= 0.0:
            raise ValueError(
                f"max_cell_optical_depth must be positive, got {self.max_cell_optical_depth}"
            )
        if self.direction_degree < 0:
            raise ValueError(f"direction_degree must be non-negative, got {self.direction_degree}")


def _normalize_resolution(resolution: int | Sequence[int]) -> tuple[int, int, int]:
    if isinstance(resolution, (int, np.integer)):
        res = (int(resolution),) * 3
    else:
        res = tuple(int(n) for n in resolution)
    if len(res) != 3:
        raise ValueError(f"resolution needs three entries, got {resolution}")
    if any(n <= 0 for n in res):
        raise ValueError(f"resolution must be positive, got {res}")
    if any(n < MIN_RESOLUTION for n in res):
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION} per axis, got {res}")
    return res


def _blob_occupancy(
    res: tuple[int, int, int], target: float, rng: np.random.Generator
) -> np.ndarray:
    """
    Occupy the ``round(target * N)`` cells closest to a few ellipsoid blobs.

    The score of a cell is its smallest normalized ellipsoid distance, so the
    selected set grows outward from every blob centre at once.
    """
    num_cells = res[0] * res[1] * res[2]
    count = int(round(target * num_cells))
    if count < 1 or abs(count / num_cells - target) > OCCUPANCY_TOLERANCE * target:
        raise OccupancyUnreachableError(
            f"occupancy {target} unreachable at resolution {res}: nearest achievable "
            f"is {count}/{num_cells}"
        )
    dims = np.asarray(res, dtype=np.float64)
    num_blobs = int(rng.integers(2, 5))
    centers = rng.uniform(0.25, 0.75, size=(num_blobs, 3)) * dims
    radii = rng.uniform(0.08, 0.2, size=(num_blobs, 3)) * dims

    axes = [np.arange(n, dtype=np.float64) + 0.5 for n in res]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    score = np.full(res, np.inf)
    for center, radius in zip(centers, radii):
        dist = np.sqrt(
            ((gx - center[0]) / radius[0]) ** 2
            + ((gy - center[1]) / radius[1]) ** 2
            + ((gz - center[2]) / radius[2]) ** 2
        )
        np.minimum(score, dist, out=score)

    order = np.argsort(score.ravel(order="F"), kind="stable")
    flat = np.zeros(num_cells, dtype=bool)
    flat[order[:count]] = True
    return flat.reshape(res, order="F")


def _smooth_field(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Low-frequency cosine field with values in [0.2, 1.0]."""
    wave = np.ones(shape, dtype=np.float64)
    for axis, n in enumerate(shape):
        freq = rng.integers(1, 3)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        coords = np.cos(2.0 * np.pi * freq * (np.arange(n) + 0.5) / n + phase)
        view = [1] * len(shape)
        view[axis] = n
        wave = wave * coords.reshape(view)
    return 0.6 + 0.4 * wave


def _sparsify(values: np.ndarray, target: float, rng: np.random.Generator) -> np.ndarray:
    """Zero exactly ``round(target * size)`` entries at random positions."""
    out = values.copy()
    zeros = int(round(target * out.size))
    if zeros:
        positions = rng.permutation(out.size)[:zeros]
        out.reshape(-1)[positions] = 0.0
    return out


def _synth_factors(
    rank: int,
    channels: int,
    res: tuple[int, int, int],
    targets: Sequence[float],
    first_slot: int,
    rng: np.random.Generator,
) -> tuple[ModeFactors, int]:
    nx, ny, nz = res
    shapes = {
        "v_x": (nx,),
        "v_y": (ny,),
        "v_z": (nz,),
        "m_yz": (ny, nz),
        "m_xz": (nx, nz),
        "m_xy": (nx, ny),
    }
    arrays = {name: np.zeros((rank, channels, *shape)) for name, shape in shapes.items()}
    slot = first_slot
    for r in range(rank):
        for name in FACTOR_NAMES:
            for c in range(channels):
                target = targets[slot % len(targets)]
                arrays[name][r, c] = _sparsify(_smooth_field(shapes[name], rng), target, rng)
                slot += 1
    return ModeFactors(**arrays), slot


def _scale_density(
    factors: ModeFactors,
    grid: OccupancyGrid,
    activation: DensityActivation,
    max_cell_optical_depth: float,
) -> ModeFactors:
    """Rescale density factors so the densest occupied cell hits the target optical depth."""
    cells = grid.occupied_cells()
    raw = factors.product_sum(cells[:, 0], cells[:, 1], cells[:, 2])
    raw_max = float(raw.max()) if raw.size else 0.0
    if raw_max <= 0.0:
        return factors
    side = float(grid.cell_size.max())
    k = activation.inverse(max_cell_optical_depth / side) / raw_max
    root = np.sqrt(k)
    scaled = {
        name: (getattr(factors, name).astype(np.float64) * root).astype(np.float32)
        for name in FACTOR_NAMES
    }
    return ModeFactors(**scaled)


def _synth_head(
    feature_width: int,
    channels: int,
    settings: GeneratorSettings,
    rng: np.random.Generator,
) -> AppearanceHead:
    widths = (
        feature_width + direction_encoding_width(settings.direction_degree),
        *settings.hidden_widths,
        channels,
    )
    weights, biases = [], []
    for a, b in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(a), size=(a, b)))
        biases.append(rng.normal(0.0, 0.1, size=b))
    return AppearanceHead(widths, tuple(weights), tuple(biases), settings.direction_degree)


def _assemble(
    occupancy: np.ndarray,
    res: tuple[int, int, int],
    rank: int,
    channels: int,
    seed: int,
    settings: GeneratorSettings,
    factor_rng: np.random.Generator,
    head_rng: np.random.Generator,
    density: ModeFactors | None = None,
) -> Scene:
    bounds = settings.bounds or SceneBounds.unit_cells(res)
    grid = OccupancyGrid(res, occupancy, bounds)
    targets = settings.factor_sparsity
    synth_density, slot = _synth_factors(rank, 1, res, targets, 0, factor_rng)
    appearance, _ = _synth_factors(rank, channels, res, targets, slot, factor_rng)
    density = _scale_density(
        density if density is not None else synth_density,
        grid,
        settings.activation,
        settings.max_cell_optical_depth,
    )
    decomp = VMDecomposition(density, appearance, settings.activation)
    head = _synth_head(decomp.feature_width, channels, settings, head_rng)
    scene = Scene(grid, decomp, head, seed)
    logger.info(
        "Generated scene seed=%d resolution=%s occupancy=%.4f rank=%d channels=%d",
        seed,
        res,
        grid.occupancy_ratio,
        rank,
        channels,
    )
    return scene


def _check_common(rank: int, channels: int, seed: int) -> None:
    if rank < 1:
        raise ValueError(f"rank must be at least 1, got {rank}")
    if channels < 1:
        raise ValueError(f"channels must be at least 1, got {channels}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")


def generate_synthetic_scene(
    resolution: int | Sequence[int],
    target_occupancy: float,
    rank: int,
    channels: int,
    seed: int,
    settings: GeneratorSettings | None = None,
) -> Scene:
    """
    Synthesize a deterministic scene of occupied blobs.

    Factor slices receive the sparsity targets in ``settings.factor_sparsity``
    cyclically, in canonical order: density factors rank-major, then
    appearance factors with each channel slice counted separately.

    Args:
        resolution: Cells per axis, an int or three ints, each at least 8.
        target_occupancy: Fraction of occupied cells in (0, 1].
        rank: Number of vector-matrix pairs per mode.
        channels: Appearance channels per rank.
        seed: Non-negative seed; equal seeds give byte-identical scenes.
        settings: Optional generator knobs.

    Returns:
        The generated scene.

    Raises:
        ValueError: On invalid arguments.
        OccupancyUnreachableError: If the target cannot be met within 10% relative.
    """
    settings = settings or GeneratorSettings()
    res = _normalize_resolution(resolution)
    if not 0.0 < target_occupancy <= 1.0:
        raise ValueError(f"target_occupancy must lie in (0, 1], got {target_occupancy}")
    _check_common(rank, channels, seed)

    occ_seq, factor_seq, head_seq = np.random.SeedSequence(seed).spawn(3)
    occupancy = _blob_occupancy(res, target_occupancy, np.random.default_rng(occ_seq))
    return _assemble(
        occupancy,
        res,
        rank,
        channels,
        seed,
        settings,
        np.random.default_rng(factor_seq),
        np.random.default_rng(head_seq),
    )


def generate_occluder_scene(
    resolution: int | Sequence[int] = 32,
    rank: int = 2,
    channels: int = 3,
    seed: int = 0,
    slab_optical_depth: float = 4.0,
    settings: GeneratorSettings | None = None,
) -> Scene:
    """
    Synthesize a scene with an opaque slab near the ``z = min`` face and a blob behind it.

    Density is uniform over the occupied cells, so a ray crossing the slab
    along +z accumulates roughly ``slab_optical_depth`` per cell.
    """
    res = _normalize_resolution(resolution)
    _check_common(rank, channels, seed)
    base = settings or GeneratorSettings()
    settings = GeneratorSettings(
        factor_sparsity=(0.0,),
        max_cell_optical_depth=slab_optical_depth,
        direction_degree=base.direction_degree,
        hidden_widths=base.hidden_widths,
        activation=base.activation,
        bounds=base.bounds,
    )
    nx, ny, nz = res
    occupancy = np.zeros(res, dtype=bool)
    thickness = max(2, nz // 8)
    z0 = nz // 8
    occupancy[nx // 8 : nx - nx // 8, ny // 8 : ny - ny // 8, z0 : z0 + thickness] = True

    axes = [np.arange(n, dtype=np.float64) + 0.5 for n in res]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    blob = (
        ((gx - nx / 2) / (nx / 5)) ** 2
        + ((gy - ny / 2) / (ny / 5)) ** 2
        + ((gz - 0.7 * nz) / (nz / 6)) ** 2
    ) <= 1.0
    occupancy |= blob

    _, factor_seq, head_seq = np.random.SeedSequence(seed).spawn(3)
    density = ModeFactors(
        v_x=np.ones((rank, 1, nx)),
        v_y=np.ones((rank, 1, ny)),
        v_z=np.ones((rank, 1, nz)),
        m_yz=np.ones((rank, 1, ny, nz)),
        m_xz=np.ones((rank, 1, nx, nz)),
        m_xy=np.ones((rank, 1, nx, ny)),
    )
    return _assemble(
        occupancy,
        res,
        rank,
        channels,
        seed,
        settings,
        np.random.default_rng(factor_seq),
        np.random.default_rng(head_seq),
        density=density,
    )
