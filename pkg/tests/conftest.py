"""Shared fixtures: small synthetic clouds and on-disk dumps."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from lidscope.pointcloud import PointCloud, TokenMeta, save_point_cloud


def make_meta(n: int, seq_len: int = 10, layer: int = -1, mode: str = "regular"):
    return tuple(
        TokenMeta(
            seq_id=i // seq_len,
            pos=i % seq_len,
            token_text=f"tok{i}",
            layer=layer,
            mode=mode,
        )
        for i in range(n)
    )


@pytest.fixture
def small_cloud() -> PointCloud:
    rng = np.random.default_rng(42)
    data = rng.standard_normal((30, 4))
    return PointCloud(data=data, meta=make_meta(30))


@pytest.fixture
def dump_factory(tmp_path: Path):
    """Write a cloud to a fresh dump file and return its path."""
    counter = {"n": 0}

    def write(cloud: PointCloud, name: str | None = None) -> Path:
        counter["n"] += 1
        path = tmp_path / (name or f"cloud{counter['n']}.bin")
        save_point_cloud(cloud, path)
        return path

    return write
