"""
Hybrid sparse codec: bitmap below 80% sparsity, COO with a search tree at or above it.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np

from sparse.bitmap import BitmapEncoding, decode_bitmap, encode_bitmap, query_bitmap, query_bitmap_many
from sparse.coo import (
    CooEncoding,
    TreeNode,
    decode_coo,
    encode_coo,
    query_coo,
    query_coo_many,
)
from sparse.query import QueryResult

COO_THRESHOLD = Fraction(4, 5)


class Variant(Enum):
    BITMAP = "bitmap"
    COO = "coo"


@dataclass(frozen=True)
class SizeModel:
    """Storage widths in bytes; a tree node stores an axis byte plus one coordinate."""

    value_width: int = 4
    coord_width: int = 2
    ptr_width: int = 4
    leaf_capacity: int = 16

    def __post_init__(self) -> None:
        for name in ("value_width", "coord_width", "ptr_width", "leaf_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def node_width(self) -> int:
        return 1 + self.coord_width


def bitmap_size(rows: int, cols: int, nnz: int, model: SizeModel) -> int:
    return -(-rows * cols // 8) + rows * model.ptr_width + nnz * model.value_width


def coo_size(nnz: int, num_nodes: int, model: SizeModel) -> int:
    return nnz * (2 * model.coord_width + model.value_width) + num_nodes * model.node_width


def choose_variant(zeros: int, size: int) -> Variant:
    """COO iff the zero fraction is at least 0.80, compared exactly."""
    return Variant.COO if Fraction(zeros, size) >= COO_THRESHOLD else Variant.BITMAP


@dataclass(frozen=True, eq=False)
class HybridEncoding:
    """An encoded matrix with its variant, sparsity and storage size."""

    variant: Variant
    payload: BitmapEncoding | CooEncoding
    sparsity: float
    encoded_bytes: int
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError(f"sparsity must lie in [0, 1], got {self.sparsity}")

    @property
    def rows(self) -> int:
        return self.payload.rows

    @property
    def cols(self) -> int:
        return self.payload.cols

    @property
    def nnz(self) -> int:
        return self.payload.nnz

    @property
    def tree_height(self) -> int | None:
        return self.payload.height if isinstance(self.payload, CooEncoding) else None


def _as_matrix(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        raise ValueError("cannot encode an empty matrix")
    if matrix.ndim == 1:
        return matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise ValueError(f"expected a vector or matrix, got shape {matrix.shape}")
    return matrix


def encoded_size(enc: HybridEncoding | BitmapEncoding | CooEncoding, model: SizeModel | None = None) -> int:
    """Storage bytes of an encoding under the size model."""
    model = model or SizeModel()
    payload = enc.payload if isinstance(enc, HybridEncoding) else enc
    if isinstance(payload, BitmapEncoding):
        return bitmap_size(payload.rows, payload.cols, payload.nnz, model)
    return coo_size(payload.nnz, payload.num_nodes, model)


def encode(
    matrix: np.ndarray,
    force_variant: Variant | None = None,
    size_model: SizeModel | None = None,
) -> HybridEncoding:
    """
    Encode a matrix or vector losslessly; vectors become ``1 x n`` matrices.

    Args:
        matrix: Non-empty 1-D or 2-D array.
        force_variant: Skip the sparsity policy and use this format.
        size_model: Widths used for ``encoded_bytes``.
    """
    size_model = size_model or SizeModel()
    original = np.asarray(matrix)
    matrix = _as_matrix(original)
    zeros = int(matrix.size - np.count_nonzero(matrix))
    variant = force_variant or choose_variant(zeros, matrix.size)
    if variant is Variant.BITMAP:
        payload: BitmapEncoding | CooEncoding = encode_bitmap(matrix)
    else:
        payload = encode_coo(matrix, size_model.leaf_capacity)
    return HybridEncoding(
        variant,
        payload,
        zeros / matrix.size,
        encoded_size(payload, size_model),
        tuple(original.shape),
    )


def query(enc: HybridEncoding, x: int, y: int) -> QueryResult:
    if isinstance(enc.payload, BitmapEncoding):
        return query_bitmap(enc.payload, x, y)
    return query_coo(enc.payload, x, y)


def query_many(enc: HybridEncoding, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(enc.payload, BitmapEncoding):
        return query_bitmap_many(enc.payload, xs, ys)
    return query_coo_many(enc.payload, xs, ys)


def decode(enc: HybridEncoding) -> np.ndarray:
    """Dense reconstruction in the original shape."""
    if isinstance(enc.payload, BitmapEncoding):
        dense = decode_bitmap(enc.payload)
    else:
        dense = decode_coo(enc.payload)
    return dense.reshape(enc.shape)


def _b64(array: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(array, dtype=dtype).tobytes()).decode("ascii")


def _unb64(text: str, dtype: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype=dtype).copy()


def dump_encoding(enc: HybridEncoding) -> dict[str, Any]:
    """JSON-ready header plus base64 little-endian payloads."""
    value_dtype = np.dtype(enc.payload.values.dtype).newbyteorder("<").str
    header: dict[str, Any] = {
        "variant": enc.variant.value,
        "rows": enc.rows,
        "cols": enc.cols,
        "shape": list(enc.shape),
        "sparsity": enc.sparsity,
        "nnz": enc.nnz,
        "encoded_bytes": enc.encoded_bytes,
        "tree_height": enc.tree_height,
        "value_dtype": value_dtype,
    }
    payload = enc.payload
    if isinstance(payload, BitmapEncoding):
        header["payload"] = {
            "row_ptr": _b64(payload.row_ptr, "<u4"),
            "bitmap": base64.b64encode(
                np.packbits(payload.bitmap.reshape(-1), bitorder="little").tobytes()
            ).decode("ascii"),
            "values": _b64(payload.values, value_dtype),
        }
    else:
        header["payload"] = {
            "xs": _b64(payload.xs, "<u4"),
            "ys": _b64(payload.ys, "<u4"),
            "values": _b64(payload.values, value_dtype),
            "node_axes": _b64([n.axis for n in payload.nodes], "<u1"),
            "node_thresholds": _b64([n.threshold for n in payload.nodes], "<u4"),
            "leaf_sizes": _b64([b.shape[0] for b in payload.leaves], "<u4"),
            "leaf_entries": _b64(
                np.concatenate(list(payload.leaves)) if payload.leaves else [], "<u4"
            ),
            "leaf_capacity": payload.leaf_capacity,
        }
    return header


def load_encoding(data: dict[str, Any], size_model: SizeModel | None = None) -> HybridEncoding:
    """Rebuild an encoding from :func:`dump_encoding` output."""
    size_model = size_model or SizeModel()
    variant = Variant(data["variant"])
    rows, cols = int(data["rows"]), int(data["cols"])
    value_dtype = data["value_dtype"]
    body = data["payload"]
    values = _unb64(body["values"], value_dtype)
    if variant is Variant.BITMAP:
        bits = np.unpackbits(
            np.frombuffer(base64.b64decode(body["bitmap"]), dtype=np.uint8),
            count=rows * cols,
            bitorder="little",
        ).astype(bool)
        payload: BitmapEncoding | CooEncoding = BitmapEncoding(
            rows,
            cols,
            _unb64(body["row_ptr"], "<u4").astype(np.int64),
            bits.reshape(rows, cols),
            values,
        )
    else:
        axes = _unb64(body["node_axes"], "<u1")
        thresholds = _unb64(body["node_thresholds"], "<u4")
        sizes = _unb64(body["leaf_sizes"], "<u4").astype(np.int64)
        entries = _unb64(body["leaf_entries"], "<u4").astype(np.int64)
        leaves = tuple(np.split(entries, np.cumsum(sizes)[:-1])) if sizes.size else ()
        payload = CooEncoding(
            rows,
            cols,
            _unb64(body["xs"], "<u4").astype(np.int64),
            _unb64(body["ys"], "<u4").astype(np.int64),
            values,
            tuple(TreeNode(int(a), int(t)) for a, t in zip(axes, thresholds)),
            leaves,
            int(data["tree_height"]),
            int(body["leaf_capacity"]),
        )
    return HybridEncoding(
        variant,
        payload,
        float(data["sparsity"]),
        encoded_size(payload, size_model),
        tuple(int(n) for n in data["shape"]),
    )
