"""
Versioned little-endian binary container for scenes.

Layout: fixed header, layer widths, bounds, occupancy bitset (x-fastest,
little bit order), factor payloads, head payloads. Floats are ``<f4``
except the bounds, which are ``<f8``.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

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
)

logger = logging.getLogger(__name__)

MAGIC = b"RTNF"
FORMAT_VERSION = 1

# magic, version, nx, ny, nz, rank, channels, seed, activation, degree, num_widths
_HEADER = struct.Struct("<4sIIIIIIQIII")
_BOUNDS = struct.Struct("<6d")
_F32 = np.dtype("<f4")


class SceneFormatError(ValueError):
    """A scene file could not be decoded; ``field`` names the offending part."""

    def __init__(self, message: str, field: str) -> None:
        super().__init__(f"{message} (field: {field})")
        self.field = field


class BadMagicError(SceneFormatError):
    pass


class VersionMismatchError(SceneFormatError):
    pass


class TruncatedPayloadError(SceneFormatError):
    pass


class DimensionMismatchError(SceneFormatError):
    pass


def _factor_arrays(factors: ModeFactors):
    """Factor slices in file order: rank-major, canonical factor order, channel."""
    for r in range(factors.rank):
        for name in FACTOR_NAMES:
            arr = getattr(factors, name)
            for c in range(factors.channels):
                yield name, arr[r, c]


def encode_scene(scene: Scene) -> bytes:
    """Serialize a scene to its canonical byte form."""
    grid, decomp, head = scene.grid, scene.decomp, scene.head
    nx, ny, nz = grid.resolution
    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            nx,
            ny,
            nz,
            decomp.rank,
            decomp.channels,
            scene.seed,
            decomp.activation.value,
            head.direction_degree,
            len(head.layer_widths),
        ),
        struct.pack(f"<{len(head.layer_widths)}I", *head.layer_widths),
        _BOUNDS.pack(*grid.bounds.min_corner, *grid.bounds.max_corner),
        np.packbits(grid.flat_bits(), bitorder="little").tobytes(),
    ]
    for factors in (decomp.density, decomp.appearance):
        for _, arr in _factor_arrays(factors):
            parts.append(np.ascontiguousarray(arr, dtype=_F32).tobytes())
    for w, b in zip(head.weights, head.biases):
        parts.append(np.ascontiguousarray(w, dtype=_F32).tobytes())
        parts.append(np.ascontiguousarray(b, dtype=_F32).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int, field: str) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise TruncatedPayloadError(
                f"truncated payload: need {size} bytes at offset {self.offset}, "
                f"{len(self.data) - self.offset} available",
                field,
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def floats(self, shape: tuple[int, ...], field: str) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(count * _F32.itemsize, field)
        return np.frombuffer(raw, dtype=_F32).reshape(shape).astype(np.float32)


def _read_factors(
    reader: _Reader, prefix: str, rank: int, channels: int, res: tuple[int, int, int]
) -> ModeFactors:
    nx, ny, nz = res
    shapes = {
        "v_x": (nx,),
        "v_y": (ny,),
        "v_z": (nz,),
        "m_yz": (ny, nz),
        "m_xz": (nx, nz),
        "m_xy": (nx, ny),
    }
    arrays = {name: np.zeros((rank, channels, *shape), dtype=np.float32) for name, shape in shapes.items()}
    for r in range(rank):
        for name in FACTOR_NAMES:
            for c in range(channels):
                arrays[name][r, c] = reader.floats(shapes[name], f"{prefix}.r{r}.{name}.c{c}")
    return ModeFactors(**arrays)


def decode_scene(data: bytes) -> Scene:
    """
    Parse the canonical byte form of a scene.

    Raises:
        BadMagicError: The file does not start with ``RTNF``.
        VersionMismatchError: The container version is not supported.
        TruncatedPayloadError: The data ends before a field is complete.
        DimensionMismatchError: Header dimensions are inconsistent.
    """
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}", "magic")
    reader.offset = 0
    (
        _,
        version,
        nx,
        ny,
        nz,
        rank,
        channels,
        seed,
        activation_code,
        degree,
        num_widths,
    ) = _HEADER.unpack(reader.take(_HEADER.size, "header"))
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"version mismatch: file has {version}, reader supports {FORMAT_VERSION}", "version"
        )
    for name, value in (("nx", nx), ("ny", ny), ("nz", nz), ("rank", rank), ("channels", channels)):
        if value < 1:
            raise DimensionMismatchError(f"dimension {name} must be positive, got {value}", name)
    if num_widths < 2:
        raise DimensionMismatchError(f"need at least two layer widths, got {num_widths}", "layer_widths")
    try:
        activation = DensityActivation(activation_code)
    except ValueError:
        raise DimensionMismatchError(f"unknown activation code {activation_code}", "activation") from None

    widths = struct.unpack(f"<{num_widths}I", reader.take(4 * num_widths, "layer_widths"))
    feature_width = 3 * rank * channels
    expected_input = feature_width + 3 + 6 * degree
    if widths[0] != expected_input:
        raise DimensionMismatchError(
            f"head input width {widths[0]} does not match features + direction encoding {expected_input}",
            "layer_widths",
        )
    if widths[-1] != channels:
        raise DimensionMismatchError(
            f"head output width {widths[-1]} does not match channels {channels}", "layer_widths"
        )
    if any(w < 1 for w in widths):
        raise DimensionMismatchError(f"layer widths must be positive, got {widths}", "layer_widths")

    corners = _BOUNDS.unpack(reader.take(_BOUNDS.size, "bounds"))
    try:
        bounds = SceneBounds(corners[:3], corners[3:])
    except ValueError as exc:
        raise DimensionMismatchError(str(exc), "bounds") from None

    res = (nx, ny, nz)
    num_cells = nx * ny * nz
    packed = np.frombuffer(reader.take((num_cells + 7) // 8, "occupancy"), dtype=np.uint8)
    flat = np.unpackbits(packed, count=num_cells, bitorder="little").astype(bool)
    grid = OccupancyGrid(res, flat, bounds)

    density = _read_factors(reader, "density", rank, 1, res)
    appearance = _read_factors(reader, "appearance", rank, channels, res)

    weights, biases = [], []
    for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        weights.append(reader.floats((a, b), f"head.w{i}"))
        biases.append(reader.floats((b,), f"head.b{i}"))
    if reader.offset != len(data):
        raise DimensionMismatchError(
            f"{len(data) - reader.offset} unexpected trailing bytes", "payload"
        )

    head = AppearanceHead(tuple(widths), tuple(weights), tuple(biases), degree)
    decomp = VMDecomposition(density, appearance, activation)
    return Scene(grid, decomp, head, seed)


def save_scene(scene: Scene, path: str | Path) -> Path:
    """Write a scene file and return its path."""
    path = Path(path)
    data = encode_scene(scene)
    path.write_bytes(data)
    logger.info("Wrote scene %s (%d bytes)", path, len(data))
    return path


def load_scene(path: str | Path) -> Scene:
    """Read a scene file written by :func:`save_scene`."""
    path = Path(path)
    scene = decode_scene(path.read_bytes())
    logger.debug("Loaded scene %s: resolution %s, rank %d", path, scene.grid.resolution, scene.decomp.rank)
    return scene
