"""Exact neighbour search vs. naive oracles, tie handling, threading."""

from __future__ import annotations

import math

import numpy as np
import pytest

from lidscope.knn import (
    NeighborGraph,
    knn_exact,
    neighbor_graph_to_csv,
    pairwise_distance,
)
from lidscope.pointcloud import PointCloud


def oracle_knn(points: np.ndarray, k: int, include_self: bool = False):
    """Per-query full sort with (distance, index) tie order."""
    n = points.shape[0]
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        diff = points - points[i]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if not include_self:
            dist[i] = np.inf
        order = np.lexsort((np.arange(n), dist))[:k]
        indices[i] = order
        distances[i] = dist[order]
    return indices, distances


def test_three_points_on_a_line():
    cloud = PointCloud(data=np.array([[0.0], [1.0], [3.0]]))
    graph = knn_exact(cloud, 2)
    assert np.array_equal(graph.indices, [[1, 2], [0, 2], [1, 0]])
    assert np.allclose(graph.distances, [[1.0, 3.0], [1.0, 2.0], [2.0, 3.0]])


def test_full_neighbor_list():
    rng = np.random.default_rng(0)
    points = rng.standard_normal((12, 3))
    graph = knn_exact(PointCloud(data=points), 11)
    idx, dist = oracle_knn(points, 11)
    assert np.array_equal(graph.indices, idx)
    assert np.allclose(graph.distances, dist, rtol=1e-12)


def test_matches_oracle_on_random_cloud():
    rng = np.random.default_rng(1)
    points = rng.standard_normal((500, 32))
    graph = knn_exact(PointCloud(data=points), 8)
    idx, dist = oracle_knn(points, 8)
    assert np.array_equal(graph.indices, idx)
    rel = np.abs(graph.distances - dist) / dist
    assert float(rel.max()) < 1e-6


def test_ties_break_by_ascending_index():
    # Integer lattice: squared distances are exact in float64, so ties are
    # exact and the index order is the only thing distinguishing them.
    xs, ys = np.meshgrid(np.arange(5.0), np.arange(5.0))
    points = np.column_stack([xs.ravel(), ys.ravel()])
    graph = knn_exact(PointCloud(data=points), 6)
    idx, dist = oracle_knn(points, 6)
    assert np.array_equal(graph.indices, idx)
    assert np.array_equal(graph.distances, dist)


def test_thread_count_does_not_change_results():
    rng = np.random.default_rng(2)
    points = rng.standard_normal((1500, 16))
    one = knn_exact(PointCloud(data=points), 5, threads=1)
    four = knn_exact(PointCloud(data=points), 5, threads=4)
    assert np.array_equal(one.indices, four.indices)
    assert np.array_equal(one.distances, four.distances)


def test_include_self_lists_query_first_at_zero():
    rng = np.random.default_rng(3)
    points = rng.standard_normal((40, 4))
    graph = knn_exact(PointCloud(data=points), 3, include_self=True)
    assert np.array_equal(graph.indices[:, 0], np.arange(40))
    assert np.all(graph.distances[:, 0] == 0.0)
    idx, dist = oracle_knn(points, 3, include_self=True)
    assert np.array_equal(graph.indices, idx)


def test_neighbor_bounds_are_validated():
    cloud = PointCloud(data=np.zeros((5, 2)) + np.arange(5)[:, None])
    with pytest.raises(ValueError):
        knn_exact(cloud, 0)
    with pytest.raises(ValueError):
        knn_exact(cloud, 5)  # only 4 others without self
    with pytest.raises(ValueError):
        knn_exact(cloud, 6, include_self=True)
    with pytest.raises(ValueError):
        knn_exact(cloud, 2, threads=0)
    knn_exact(cloud, 5, include_self=True)  # n itself is fine with self


def test_graph_shape_validation():
    with pytest.raises(ValueError):
        NeighborGraph(indices=np.zeros((2, 3), dtype=np.int64), distances=np.zeros((2, 2)))


def test_pairwise_distance_basics():
    assert pairwise_distance([0.0, 0.0], [3.0, 4.0]) == 5.0
    x = np.random.default_rng(4).standard_normal(64)
    assert pairwise_distance(x, x) == 0.0
    with pytest.raises(ValueError):
        pairwise_distance([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        pairwise_distance(np.zeros((2, 2)), np.zeros((2, 2)))


def test_pairwise_distance_is_bitwise_symmetric():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.standard_normal(17) * rng.uniform(1e-3, 1e3)
        y = rng.standard_normal(17) * rng.uniform(1e-3, 1e3)
        assert pairwise_distance(x, y) == pairwise_distance(y, x)


def test_pairwise_distance_matches_fsum_oracle():
    rng = np.random.default_rng(6)
    for _ in range(30):
        x = rng.standard_normal(256)
        y = rng.standard_normal(256)
        expected = math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x, y)))
        got = pairwise_distance(x, y)
        assert abs(got - expected) <= 1e-12 * expected


def test_csv_dump_format(tmp_path):
    graph = NeighborGraph(
        indices=np.array([[1, 2], [0, 2]], dtype=np.int64),
        distances=np.array([[1.0, 2.5], [1.0, 0.1]]),
    )
    path = tmp_path / "graph.csv"
    neighbor_graph_to_csv(graph, path)
    assert path.read_text() == (
        "query,rank,neighbor,distance\n"
        "0,0,1,1.0\n"
        "0,1,2,2.5\n"
        "1,0,0,1.0\n"
        "1,1,2,0.1\n"
    )
