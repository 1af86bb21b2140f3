"""
Coordinate (COO) sparse format with a balanced binary search tree.

Every internal node compares one coordinate against a threshold
(``x < t`` goes left). The tree is complete with fixed height, so every
lookup walks ``height`` comparisons and spends one more cycle matching
inside the leaf bucket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sparse.query import QueryResult, check_bounds

DEFAULT_LEAF_CAPACITY = 16
AXIS_X = 0
AXIS_Y = 1


@dataclass(frozen=True)
class TreeNode:
    axis: int
    threshold: int

    def label(self) -> str:
        return f"{'xy'[self.axis]}<{self.threshold}"


@dataclass(frozen=True, eq=False)
class CooEncoding:
    """
    Entries sorted by ``(x, y)`` plus a complete search tree.

    ``nodes`` are stored in heap order (children of ``i`` at ``2i + 1`` and
    ``2i + 2``); leaf ``j`` hangs under heap slot ``2**height - 1 + j`` and
    holds indices into the entry arrays.
    """

    rows: int
    cols: int
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    nodes: tuple[TreeNode, ...]
    leaves: tuple[np.ndarray, ...]
    height: int
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_leaves(self) -> int:
        return len(self.leaves)

    @property
    def latency(self) -> int:
        return self.height + 1

    def entry_leaf(self) -> np.ndarray:
        owner = np.empty(self.nnz, dtype=np.int64)
        for j, bucket in enumerate(self.leaves):
            owner[bucket] = j
        return owner


def _median_threshold(values: np.ndarray, lo: int, hi: int) -> int:
    """Threshold in ``(lo, hi]`` whose left share is closest to half."""
    n = values.shape[0]
    if n == 0:
        return (lo + hi + 1) // 2
    ordered = np.sort(values)
    candidates = np.unique(np.concatenate([ordered, [ordered[-1] + 1]]))
    candidates = candidates[candidates > lo] if lo < hi else candidates
    if candidates.size == 0:
        return hi
    left = np.searchsorted(ordered, candidates, side="left")
    imbalance = np.abs(left - n / 2)
    return int(candidates[int(np.argmin(imbalance))])


def _build_tree(
    xs: np.ndarray, ys: np.ndarray, height: int, rows: int, cols: int
) -> tuple[list[TreeNode], list[np.ndarray]]:
    nodes: list[TreeNode | None] = [None] * (2**height - 1)
    leaves: list[np.ndarray | None] = [None] * (2**height)

    def split(slot: int, idx: np.ndarray, depth: int, box: tuple[int, int, int, int]) -> None:
        if depth == height:
            leaves[slot - (2**height - 1)] = idx
            return
        x_lo, x_hi, y_lo, y_hi = box
        axis = AXIS_X if depth % 2 == 0 else AXIS_Y
        if axis == AXIS_X:
            threshold = _median_threshold(xs[idx], x_lo, x_hi)
        else:
            threshold = _median_threshold(ys[idx], y_lo, y_hi)
        nodes[slot] = TreeNode(axis, threshold)
        coord = xs[idx] if axis == AXIS_X else ys[idx]
        go_left = coord < threshold
        if axis == AXIS_X:
            left_box = (x_lo, threshold, y_lo, y_hi)
            right_box = (threshold, x_hi, y_lo, y_hi)
        else:
            left_box = (x_lo, x_hi, y_lo, threshold)
            right_box = (x_lo, x_hi, threshold, y_hi)
        split(2 * slot + 1, idx[go_left], depth + 1, left_box)
        split(2 * slot + 2, idx[~go_left], depth + 1, right_box)

    split(0, np.arange(xs.shape[0]), 0, (0, rows, 0, cols))
    return nodes, leaves


def minimum_height(nnz: int, leaf_capacity: int) -> int:
    leaves = max(1, math.ceil(nnz / leaf_capacity))
    return math.ceil(math.log2(leaves))


def encode_coo(matrix: np.ndarray, leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> CooEncoding:
    """
    Encode a matrix as sorted coordinates with a balanced search tree.

    The tree starts at the minimum height for ``ceil(nnz / leaf_capacity)``
    leaves and grows one level whenever a leaf would overflow.
    """
    if leaf_capacity < 1:
        raise ValueError(f"leaf_capacity must be positive, got {leaf_capacity}")
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"COO encoding needs a 2-D matrix, got shape {matrix.shape}")
    xs, ys = np.nonzero(matrix)
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    values = matrix[xs, ys].copy()
    height = minimum_height(xs.shape[0], leaf_capacity)
    while True:
        nodes, leaves = _build_tree(xs, ys, height, matrix.shape[0], matrix.shape[1])
        if all(bucket.shape[0] <= leaf_capacity for bucket in leaves):
            break
        height += 1
    return CooEncoding(
        matrix.shape[0],
        matrix.shape[1],
        xs,
        ys,
        values,
        tuple(nodes),
        tuple(leaves),
        height,
        leaf_capacity,
    )


def search_path(enc: CooEncoding, x: int, y: int) -> tuple[list[str], int]:
    """Comparison labels along the root-to-leaf walk and the reached leaf."""
    slot = 0
    labels = []
    for _ in range(enc.height):
        node = enc.nodes[slot]
        coord = x if node.axis == AXIS_X else y
        labels.append(node.label() if coord < node.threshold else f"{'xy'[node.axis]}>={node.threshold}")
        slot = 2 * slot + 1 if coord < node.threshold else 2 * slot + 2
    return labels, slot - (2**enc.height - 1)


def query_coo(enc: CooEncoding, x: int, y: int) -> QueryResult:
    """
    Look up element ``(x, y)``; latency is ``height + 1`` for every query.

    Raises:
        QueryOutOfBoundsError: If ``(x, y)`` is outside the matrix.
    """
    check_bounds(enc.rows, enc.cols, x, y)
    _, leaf = search_path(enc, x, y)
    bucket = enc.leaves[leaf]
    match = bucket[(enc.xs[bucket] == x) & (enc.ys[bucket] == y)]
    value = float(enc.values[match[0]]) if match.size else 0.0
    return QueryResult(value, enc.latency)


def query_coo_many(enc: CooEncoding, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized tree walk and leaf match; returns ``(values, cycles)``."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    check_bounds(enc.rows, enc.cols, xs, ys)
    axis = np.array([n.axis for n in enc.nodes], dtype=np.int64)
    threshold = np.array([n.threshold for n in enc.nodes], dtype=np.int64)
    slot = np.zeros(xs.shape, dtype=np.int64)
    for _ in range(enc.height):
        coord = np.where(axis[slot] == AXIS_X, xs, ys)
        slot = np.where(coord < threshold[slot], 2 * slot + 1, 2 * slot + 2)
    leaf = slot - (2**enc.height - 1)

    values = np.zeros(xs.shape, dtype=np.float64)
    if enc.nnz:
        keys = enc.xs * enc.cols + enc.ys
        wanted = xs * enc.cols + ys
        pos = np.minimum(np.searchsorted(keys, wanted), enc.nnz - 1)
        found = (keys[pos] == wanted) & (enc.entry_leaf()[pos] == leaf)
        values[found] = enc.values[pos[found]]
    return values, np.full(xs.shape, enc.latency, dtype=np.int64)


def decode_coo(enc: CooEncoding) -> np.ndarray:
    out = np.zeros((enc.rows, enc.cols), dtype=enc.values.dtype)
    out[enc.xs, enc.ys] = enc.values
    return out
