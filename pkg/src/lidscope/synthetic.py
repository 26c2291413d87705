"""Synthetic manifolds with known intrinsic dimension.

These generators back the built-in self-checks: clouds sampled from a
d-dimensional manifold embedded (rotated) into a higher-dimensional
ambient space, mixtures of two manifolds of different dimension, and raw
Pareto ratio samples for exercising the estimators without any geometry
in the loop.
"""

from __future__ import annotations

import numpy as np

from .pointcloud import PointCloud
from .rng import STREAM_SYNTHETIC, make_rng
from .twonn import RatioSample


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random orthogonal matrix via QR with sign correction."""
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def hypercube_cloud(
    n_points: int,
    intrinsic_dim: int,
    ambient_dim: int,
    seed: int,
    rotate: bool = True,
) -> PointCloud:
    """Uniform sample from a unit d-cube embedded in ambient_dim space."""
    if intrinsic_dim > ambient_dim:
        raise ValueError(
            f"intrinsic_dim={intrinsic_dim} exceeds ambient_dim={ambient_dim}"
        )
    rng = make_rng(seed, STREAM_SYNTHETIC)
    coords = rng.random((n_points, intrinsic_dim))
    data = np.zeros((n_points, ambient_dim), dtype=np.float64)
    data[:, :intrinsic_dim] = coords
    if rotate and ambient_dim > 1:
        data = data @ random_rotation(ambient_dim, rng).T
    return PointCloud(data=data)


def ball_cloud(
    n_points: int,
    intrinsic_dim: int,
    ambient_dim: int,
    seed: int,
    radius: float = 1.0,
    center: np.ndarray | None = None,
) -> PointCloud:
    """Uniform sample from a solid d-ball embedded in ambient_dim space."""
    if intrinsic_dim > ambient_dim:
        raise ValueError(
            f"intrinsic_dim={intrinsic_dim} exceeds ambient_dim={ambient_dim}"
        )
    rng = make_rng(seed, STREAM_SYNTHETIC)
    direction = rng.standard_normal((n_points, intrinsic_dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n_points) ** (1.0 / intrinsic_dim)
    data = np.zeros((n_points, ambient_dim), dtype=np.float64)
    data[:, :intrinsic_dim] = direction * r[:, None]
    if center is not None:
        data = data + np.asarray(center, dtype=np.float64)
    return PointCloud(data=data)


def two_density_cloud(
    n_points: int,
    intrinsic_dim: int,
    ambient_dim: int,
    seed: int,
    dense_fraction: float = 0.4,
    dense_side: float = 0.04,
) -> PointCloud:
    """A d-cube sampled at two very different densities.

    Most points cover the unit d-cube uniformly; ``dense_fraction`` of them
    are packed into a small sub-cube of side ``dense_side``, giving the
    cloud regions whose nearest-neighbour scales differ by orders of
    magnitude -- like real embedding clouds, and unlike a uniform sample.
    The intrinsic dimension is the same everywhere.
    """
    if not 0.0 < dense_fraction < 1.0:
        raise ValueError(f"dense_fraction must be in (0, 1), got {dense_fraction}")
    if not 0.0 < dense_side < 1.0:
        raise ValueError(f"dense_side must be in (0, 1), got {dense_side}")
    if intrinsic_dim > ambient_dim:
        raise ValueError(
            f"intrinsic_dim={intrinsic_dim} exceeds ambient_dim={ambient_dim}"
        )
    rng = make_rng(seed, STREAM_SYNTHETIC)
    n_dense = int(round(n_points * dense_fraction))
    sparse = rng.random((n_points - n_dense, intrinsic_dim))
    dense = 0.3 + dense_side * rng.random((n_dense, intrinsic_dim))
    data = np.zeros((n_points, ambient_dim), dtype=np.float64)
    data[: n_points - n_dense, :intrinsic_dim] = sparse
    data[n_points - n_dense :, :intrinsic_dim] = dense
    if ambient_dim > 1:
        data = data @ random_rotation(ambient_dim, rng).T
    return PointCloud(data=data)


def two_manifold_mixture(
    n_each: int,
    ambient_dim: int = 32,
    seed: int = 0,
    separation: float = 100.0,
) -> tuple[PointCloud, np.ndarray]:
    """A 2-D disk and a 5-D ball, far apart in a shared ambient space.

    Returns the mixed cloud (disk points first) and a label array with 2
    for disk points and 5 for ball points.
    """
    disk = ball_cloud(n_each, 2, ambient_dim, seed=seed)
    offset = np.zeros(ambient_dim)
    offset[0] = separation
    ball = ball_cloud(n_each, 5, ambient_dim, seed=seed + 1, center=offset)
    data = np.vstack([disk.data, ball.data])
    labels = np.concatenate(
        [np.full(n_each, 2, dtype=np.int64), np.full(n_each, 5, dtype=np.int64)]
    )
    return PointCloud(data=data), labels


def pareto_ratio_sample(shape: float, n: int, seed: int) -> RatioSample:
    """Ratios drawn directly from a Pareto(shape) distribution on [1, inf).

    Inverse-CDF sampling: mu = (1 - U)^(-1/shape).  Feeding these to the
    estimators checks the fitting machinery in isolation: both should
    recover ``shape``.
    """
    if shape <= 0:
        raise ValueError(f"shape must be positive, got {shape}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = make_rng(seed, STREAM_SYNTHETIC)
    u = rng.random(n)
    mus = (1.0 - u) ** (-1.0 / shape)
    return RatioSample(mus=mus, n_used=n, n_dropped=0)
