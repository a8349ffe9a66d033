"""Exact k-nearest-neighbor lists under the Euclidean metric.

Brute force O(N^2 m) on purpose: neighborhood correctness is the whole
point downstream, so no approximate index is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import Dataset

__all__ = ["NeighborLists", "KnnError", "euclidean", "exact_knn"]


class KnnError(ValueError):
    """Invalid neighbor-query parameters."""


@dataclass(frozen=True)
class NeighborLists:
    """Per-vertex neighbor ids and distances, ascending by (distance, id).

    Self is never listed.  indices and distances are (N, k) arrays.
    """

    indices: np.ndarray
    distances: np.ndarray
    k: int
    metric: str = "euclidean"

    def __post_init__(self):
        self.indices.setflags(write=False)
        self.distances.setflags(write=False)

    @property
    def n(self) -> int:
        return self.indices.shape[0]


def euclidean(a, b) -> float:
    """Euclidean norm of a - b; the vectors must share one dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise KnnError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.sum(d * d)))


def _squared_distance_block(values: np.ndarray, rows: slice) -> np.ndarray:
    # Accumulate (a-b)^2 feature by feature: keeps peak memory at
    # chunk*N doubles and makes d2[i,j] == d2[j,i] exactly, since both
    # sides sum identical squares in the same feature order.
    block = values[rows]
    d2 = np.zeros((block.shape[0], values.shape[0]))
    for f in range(values.shape[1]):
        diff = block[:, f][:, None] - values[:, f][None, :]
        d2 += diff * diff
    return d2


def exact_knn(dataset: Dataset, k: int, chunk: int = 512) -> NeighborLists:
    """The k nearest other vertices per vertex, ties broken by smaller id."""
    n = dataset.n
    k = int(k)
    if not 1 <= k <= n - 1:
        raise KnnError(f"k must be in [1, {n - 1}], got {k}")
    values = dataset.values
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = _squared_distance_block(values, slice(start, stop))
        rows = np.arange(start, stop)
        d2[rows - start, rows] = np.inf  # exclude self (duplicates keep 0)
        # stable sort: equal distances keep ascending id order
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        indices[start:stop] = order
        distances[start:stop] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return NeighborLists(indices=indices, distances=distances, k=k)
