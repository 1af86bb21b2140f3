"""Data models for synthetic radiance-field scenes."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

LN2 = float(np.log(2.0))

# Canonical factor order inside one rank: the three vectors, then the three
# matrices paired with them (v^X with M^{YZ}, v^Y with M^{XZ}, v^Z with M^{XY}).
FACTOR_NAMES = ("v_x", "v_y", "v_z", "m_yz", "m_xz", "m_xy")


class DensityActivation(Enum):
    """Transfer function applied to the raw decomposed density sum."""

    SHIFTED_SOFTPLUS = 0
    SOFTPLUS = 1
    RELU = 2

    def apply(self, raw: np.ndarray) -> np.ndarray:
        """Map raw sums to non-negative densities."""
        raw = np.asarray(raw, dtype=np.float64)
        if self is DensityActivation.RELU:
            return np.maximum(raw, 0.0)
        soft = np.logaddexp(0.0, raw)
        if self is DensityActivation.SOFTPLUS:
            return soft
        return np.where(raw > 0.0, np.maximum(soft - LN2, 0.0), 0.0)

    def inverse(self, sigma: float) -> float:
        """Raw sum that produces the given positive density."""
        if sigma <= 0.0:
            raise ValueError(f"inverse is only defined for positive densities, got {sigma}")
        if self is DensityActivation.RELU:
            return float(sigma)
        if self is DensityActivation.SOFTPLUS:
            return float(np.log(np.expm1(sigma)))
        return float(np.log(np.expm1(sigma + LN2)))


@dataclass(frozen=True)
class SceneBounds:
    """Axis-aligned world-space box holding the scene."""

    min_corner: tuple[float, float, float]
    max_corner: tuple[float, float, float]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.min_corner)
        hi = tuple(float(v) for v in self.max_corner)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("bounds corners must have three coordinates")
        for axis, (a, b) in enumerate(zip(lo, hi)):
            if not b > a:
                raise ValueError(
                    f"max_corner must exceed min_corner on axis {axis}: {a} >= {b}"
                )
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @classmethod
    def unit_cells(cls, resolution: tuple[int, int, int]) -> "SceneBounds":
        """Bounds spanning [0, N] per axis, so every cell has side one."""
        return cls((0.0, 0.0, 0.0), tuple(float(n) for n in resolution))

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.min_corner, dtype=np.float64)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.max_corner, dtype=np.float64)

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def cell_size(self, resolution: tuple[int, int, int]) -> np.ndarray:
        """Per-axis cell side lengths for a grid of the given resolution."""
        return self.extent / np.asarray(resolution, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """
    Binary occupancy over a regular grid.

    ``bits`` is indexed ``[x, y, z]``. Flat cell indices are x-fastest:
    ``x + Nx * (y + Ny * z)``.
    """

    resolution: tuple[int, int, int]
    bits: np.ndarray
    bounds: SceneBounds

    def __post_init__(self) -> None:
        res = tuple(int(n) for n in self.resolution)
        if len(res) != 3 or any(n < 1 for n in res):
            raise ValueError(f"resolution must be three positive integers, got {self.resolution}")
        bits = np.asarray(self.bits, dtype=bool)
        if bits.size != res[0] * res[1] * res[2]:
            raise ValueError(
                f"bits length {bits.size} does not match resolution {res}"
            )
        if bits.ndim == 3 and bits.shape != res:
            raise ValueError(f"bits shape {bits.shape} does not match resolution {res}")
        bits = bits.reshape(res) if bits.ndim == 3 else bits.reshape(res, order="F")
        bits = np.array(bits, dtype=bool)
        bits.flags.writeable = False
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, resolution: tuple[int, int, int], bounds: SceneBounds | None = None) -> "OccupancyGrid":
        """A grid with no occupied cells."""
        bounds = bounds or SceneBounds.unit_cells(resolution)
        return cls(resolution, np.zeros(resolution, dtype=bool), bounds)

    @classmethod
    def full(cls, resolution: tuple[int, int, int], bounds: SceneBounds | None = None) -> "OccupancyGrid":
        """A grid with every cell occupied."""
        bounds = bounds or SceneBounds.unit_cells(resolution)
        return cls(resolution, np.ones(resolution, dtype=bool), bounds)

    @property
    def num_cells(self) -> int:
        nx, ny, nz = self.resolution
        return nx * ny * nz

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def occupancy_ratio(self) -> float:
        return self.popcount / self.num_cells

    @cached_property
    def cell_size(self) -> np.ndarray:
        return self.bounds.cell_size(self.resolution)

    def flat_bits(self) -> np.ndarray:
        """Occupancy as a flat x-fastest boolean vector."""
        return self.bits.ravel(order="F")

    def flat_index(self, cells: np.ndarray) -> np.ndarray:
        """Flat x-fastest indices for an ``(M, 3)`` array of cell indices."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 3)
        nx, ny, _ = self.resolution
        return cells[:, 0] + nx * (cells[:, 1] + ny * cells[:, 2])

    def contains_index(self, cell: tuple[int, int, int]) -> bool:
        return all(0 <= int(c) < n for c, n in zip(cell, self.resolution))

    def is_occupied(self, cell: tuple[int, int, int]) -> bool:
        return self.contains_index(cell) and bool(self.bits[tuple(int(c) for c in cell)])

    @cached_property
    def _occupied(self) -> np.ndarray:
        flat = np.flatnonzero(self.flat_bits())
        cells = np.stack(np.unravel_index(flat, self.resolution, order="F"), axis=1)
        cells = cells.astype(np.int64)
        cells.flags.writeable = False
        return cells

    def occupied_cells(self) -> np.ndarray:
        """``(K, 3)`` indices of occupied cells in flat x-fastest order."""
        return self._occupied

    def cell_centers(self, cells: np.ndarray) -> np.ndarray:
        cells = np.asarray(cells, dtype=np.float64).reshape(-1, 3)
        return self.bounds.lo + (cells + 0.5) * self.cell_size

    def cell_boxes(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """World-space ``(lo, hi)`` corners of each cell."""
        cells = np.asarray(cells, dtype=np.float64).reshape(-1, 3)
        lo = self.bounds.lo + cells * self.cell_size
        return lo, lo + self.cell_size

    def quantize(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Map world points to cell indices.

        Returns:
            ``(cells, inside)`` where ``inside`` flags points within the grid.
        """
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        cells = np.floor((points - self.bounds.lo) / self.cell_size).astype(np.int64)
        res = np.asarray(self.resolution)
        inside = np.all((cells >= 0) & (cells < res), axis=1)
        return cells, inside

    def occupied_bounds(self) -> SceneBounds | None:
        """Tight box around the occupied cells, or None for an empty grid."""
        cells = self.occupied_cells()
        if cells.shape[0] == 0:
            return None
        lo = self.bounds.lo + cells.min(axis=0) * self.cell_size
        hi = self.bounds.lo + (cells.max(axis=0) + 1) * self.cell_size
        return SceneBounds(tuple(lo), tuple(hi))


def occupancy_ratio(grid: OccupancyGrid) -> float:
    """Fraction of occupied cells, popcount / (Nx * Ny * Nz)."""
    return grid.occupancy_ratio


@dataclass(frozen=True, eq=False)
class ModeFactors:
    """
    Vector-matrix factor pairs for one field, all float32.

    Every array carries a leading ``(rank, channel)`` prefix: vectors are
    ``(R, C, N)`` and matrices ``(R, C, Na, Nb)``. Density uses ``C = 1``.
    """

    v_x: np.ndarray
    v_y: np.ndarray
    v_z: np.ndarray
    m_yz: np.ndarray
    m_xz: np.ndarray
    m_xy: np.ndarray

    def __post_init__(self) -> None:
        for name in FACTOR_NAMES:
            arr = np.array(getattr(self, name), dtype=np.float32)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        rank, channels, nx = self.v_x.shape
        ny, nz = self.v_y.shape[2], self.v_z.shape[2]
        if rank < 1 or channels < 1:
            raise ValueError(f"rank and channels must be positive, got R={rank} C={channels}")
        expected = {
            "v_x": (rank, channels, nx),
            "v_y": (rank, channels, ny),
            "v_z": (rank, channels, nz),
            "m_yz": (rank, channels, ny, nz),
            "m_xz": (rank, channels, nx, nz),
            "m_xy": (rank, channels, nx, ny),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(
                    f"factor {name} has shape {getattr(self, name).shape}, expected {shape}"
                )

    @classmethod
    def zeros(cls, rank: int, channels: int, resolution: tuple[int, int, int]) -> "ModeFactors":
        nx, ny, nz = resolution
        return cls(
            v_x=np.zeros((rank, channels, nx)),
            v_y=np.zeros((rank, channels, ny)),
            v_z=np.zeros((rank, channels, nz)),
            m_yz=np.zeros((rank, channels, ny, nz)),
            m_xz=np.zeros((rank, channels, nx, nz)),
            m_xy=np.zeros((rank, channels, nx, ny)),
        )

    @property
    def rank(self) -> int:
        return self.v_x.shape[0]

    @property
    def channels(self) -> int:
        return self.v_x.shape[1]

    @property
    def resolution(self) -> tuple[int, int, int]:
        return (self.v_x.shape[2], self.v_y.shape[2], self.v_z.shape[2])

    @cached_property
    def as_float64(self) -> dict[str, np.ndarray]:
        """Exact float64 promotions used by all arithmetic."""
        return {name: getattr(self, name).astype(np.float64) for name in FACTOR_NAMES}

    def product_sum(self, xs: np.ndarray, ys: np.ndarray, zs: np.ndarray) -> np.ndarray:
        """Channel-0 plane-line products summed rank-major, then X, Y, Z, at the given indices."""
        f = self.as_float64
        acc = np.zeros(np.shape(xs)[0])
        for r in range(self.rank):
            acc += f["v_x"][r, 0, xs] * f["m_yz"][r, 0, ys, zs]
            acc += f["v_y"][r, 0, ys] * f["m_xz"][r, 0, xs, zs]
            acc += f["v_z"][r, 0, zs] * f["m_xy"][r, 0, xs, ys]
        return acc

    def iter_factors(self):
        """Yield ``(rank, name, channel, array)`` in canonical order."""
        for r in range(self.rank):
            for name in FACTOR_NAMES:
                arr = getattr(self, name)
                for c in range(self.channels):
                    yield r, name, c, arr[r, c]

    def replace(self, **arrays: np.ndarray) -> "ModeFactors":
        values = {name: getattr(self, name) for name in FACTOR_NAMES}
        values.update(arrays)
        return ModeFactors(**values)


@dataclass(frozen=True, eq=False)
class VMDecomposition:
    """Density and appearance factors of a vector-matrix decomposed grid."""

    density: ModeFactors
    appearance: ModeFactors
    activation: DensityActivation = DensityActivation.SHIFTED_SOFTPLUS

    def __post_init__(self) -> None:
        if self.density.channels != 1:
            raise ValueError(f"density factors must have one channel, got {self.density.channels}")
        if self.density.rank != self.appearance.rank:
            raise ValueError(
                f"density rank {self.density.rank} differs from appearance rank {self.appearance.rank}"
            )
        if self.density.resolution != self.appearance.resolution:
            raise ValueError("density and appearance factors disagree on resolution")

    @property
    def rank(self) -> int:
        return self.density.rank

    @property
    def channels(self) -> int:
        return self.appearance.channels

    @property
    def resolution(self) -> tuple[int, int, int]:
        return self.density.resolution

    @property
    def feature_width(self) -> int:
        """Width of the concatenated appearance products: three modes per rank and channel."""
        return 3 * self.rank * self.channels


def direction_encoding_width(degree: int) -> int:
    return 3 + 6 * degree


@dataclass(frozen=True, eq=False)
class AppearanceHead:
    """
    Small MLP mapping appearance features plus encoded view direction to color.

    ``weights[i]`` has shape ``(layer_widths[i], layer_widths[i + 1])``.
    Hidden layers use tanh; the output layer uses a sigmoid per channel.
    """

    layer_widths: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    direction_degree: int = 2

    def __post_init__(self) -> None:
        widths = tuple(int(w) for w in self.layer_widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ValueError(f"layer widths must be at least two positive integers, got {widths}")
        if self.direction_degree < 0:
            raise ValueError(f"direction_degree must be non-negative, got {self.direction_degree}")
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise ValueError("one weight matrix and bias vector are required per layer")
        weights, biases = [], []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w = np.array(w, dtype=np.float32)
            b = np.array(b, dtype=np.float32)
            if w.shape != (widths[i], widths[i + 1]) or b.shape != (widths[i + 1],):
                raise ValueError(
                    f"layer {i} weights {w.shape} / bias {b.shape} incompatible with widths {widths}"
                )
            w.flags.writeable = False
            b.flags.writeable = False
            weights.append(w)
            biases.append(b)
        object.__setattr__(self, "layer_widths", widths)
        object.__setattr__(self, "weights", tuple(weights))
        object.__setattr__(self, "biases", tuple(biases))

    @classmethod
    def constant(
        cls,
        input_width: int,
        channels: int,
        bias: float,
        hidden: tuple[int, ...] = (64, 64),
        direction_degree: int = 2,
    ) -> "AppearanceHead":
        """A head with zero weights whose output is sigmoid(bias) everywhere."""
        widths = (input_width, *hidden, channels)
        weights = tuple(np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:]))
        biases = tuple(np.zeros(b) for b in widths[1:-1]) + (np.full(channels, bias),)
        return cls(widths, weights, biases, direction_degree)

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    @property
    def output_width(self) -> int:
        return self.layer_widths[-1]

    @property
    def macs_per_sample(self) -> int:
        return sum(a * b for a, b in zip(self.layer_widths[:-1], self.layer_widths[1:]))

    @cached_property
    def as_float64(self) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
        return (
            tuple(w.astype(np.float64) for w in self.weights),
            tuple(b.astype(np.float64) for b in self.biases),
        )


@dataclass(frozen=True, eq=False)
class Scene:
    """Occupancy grid, decomposed embedding grids and appearance head."""

    grid: OccupancyGrid
    decomp: VMDecomposition
    head: AppearanceHead
    seed: int = 0

    def __post_init__(self) -> None:
        if self.decomp.resolution != self.grid.resolution:
            raise ValueError(
                f"factor resolution {self.decomp.resolution} does not match grid {self.grid.resolution}"
            )
        expected = self.decomp.feature_width + direction_encoding_width(self.head.direction_degree)
        if self.head.input_width != expected:
            raise ValueError(
                f"head input width {self.head.input_width} != features {self.decomp.feature_width}"
                f" + direction encoding {direction_encoding_width(self.head.direction_degree)}"
            )
        if self.head.output_width != self.decomp.channels:
            raise ValueError(
                f"head output width {self.head.output_width} != channels {self.decomp.channels}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    @property
    def bounds(self) -> SceneBounds:
        return self.grid.bounds

    def fingerprint(self) -> str:
        """SHA-256 of the canonical container encoding."""
        from scene.container import encode_scene

        return hashlib.sha256(encode_scene(self)).hexdigest()
