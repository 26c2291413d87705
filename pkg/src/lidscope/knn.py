"""Exact nearest-neighbour search by blocked brute force.

No index structures, no approximation: every query is compared against
every point, in float64, and ties are broken by ascending point index.
Queries are processed in fixed-size blocks so memory stays bounded; the
block size never depends on the thread count, which keeps results
bit-identical whether the search runs on one thread or many (threads own
disjoint query blocks and numpy releases the GIL inside the heavy kernels).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pointcloud import PointCloud

_BLOCK_SIZE = 256


@dataclass(frozen=True)
class NeighborGraph:
    """Per-query neighbour indices and distances, sorted ascending."""

    indices: np.ndarray  # (n_queries, n_neighbors) int64
    distances: np.ndarray  # (n_queries, n_neighbors) float64

    def __post_init__(self) -> None:
        if self.indices.shape != self.distances.shape:
            raise ValueError(
                f"indices shape {self.indices.shape} != "
                f"distances shape {self.distances.shape}"
            )

    @property
    def n_queries(self) -> int:
        return int(self.indices.shape[0])

    @property
    def n_neighbors(self) -> int:
        return int(self.indices.shape[1])


def pairwise_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Euclidean distance between two vectors, accumulated in float64."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("pairwise_distance expects 1-D vectors")
    if x.shape[0] != y.shape[0]:
        raise ValueError(
            f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}"
        )
    diff = x - y
    return float(np.sqrt(np.dot(diff, diff)))


def _squared_block(
    queries: np.ndarray, points: np.ndarray, sq_queries: np.ndarray, sq_points: np.ndarray
) -> np.ndarray:
    """Squared distances of a query block against all points (clamped >= 0)."""
    d2 = sq_queries[:, None] + sq_points[None, :] - 2.0 * (queries @ points.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _select_neighbors(row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries of ``row``; ties go to lower index."""
    if k >= row.shape[0]:
        candidates = np.arange(row.shape[0])
    else:
        kth = np.partition(row, k - 1)[k - 1]
        strict = np.flatnonzero(row < kth)
        ties = np.flatnonzero(row == kth)[: k - len(strict)]
        candidates = np.concatenate([strict, ties])
    order = np.lexsort((candidates, row[candidates]))
    return candidates[order]


def knn_exact(
    cloud: PointCloud,
    n_neighbors: int,
    include_self: bool = False,
    threads: int = 1,
) -> NeighborGraph:
    """Exact k-nearest-neighbour graph of a cloud against itself.

    With ``include_self`` each query lists itself first at distance zero;
    otherwise the query point is excluded from its own neighbour list.
    Ties in distance are resolved by ascending point index, so the output
    is fully determined by the input.
    """
    n = cloud.n_points
    limit = n if include_self else n - 1
    if n_neighbors < 1:
        raise ValueError(f"n_neighbors must be positive, got {n_neighbors}")
    if n_neighbors > limit:
        raise ValueError(
            f"n_neighbors={n_neighbors} exceeds the {limit} available "
            f"neighbours of a {n}-point cloud"
            + ("" if include_self else " (self excluded)")
        )
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")

    points = np.ascontiguousarray(cloud.data, dtype=np.float64)
    sq = np.einsum("ij,ij->i", points, points)
    indices = np.empty((n, n_neighbors), dtype=np.int64)
    distances = np.empty((n, n_neighbors), dtype=np.float64)

    def run_block(start: int) -> None:
        stop = min(start + _BLOCK_SIZE, n)
        d2 = _squared_block(points[start:stop], points, sq[start:stop], sq)
        for offset in range(stop - start):
            row = d2[offset]
            query = start + offset
            row[query] = 0.0 if include_self else np.inf
            chosen = _select_neighbors(row, n_neighbors)
            indices[query] = chosen
            distances[query] = np.sqrt(row[chosen])

    starts = range(0, n, _BLOCK_SIZE)
    if threads == 1:
        for start in starts:
            run_block(start)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, starts))
    return NeighborGraph(indices=indices, distances=distances)


def neighbor_graph_to_csv(graph: NeighborGraph, path: str | Path) -> None:
    """Write a graph as ``query,rank,neighbor,distance`` rows."""
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("query,rank,neighbor,distance\n")
        for query in range(graph.n_queries):
            for rank in range(graph.n_neighbors):
                fh.write(
                    f"{query},{rank},{int(graph.indices[query, rank])},"
                    f"{float(graph.distances[query, rank])!r}\n"
                )
