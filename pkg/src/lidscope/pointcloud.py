"""Point-cloud container, binary dump I/O, dedup and token subsampling.

A point cloud is an (n_points, dim) float array, optionally paired with
per-point token metadata.  Clouds are exchanged on disk in a small binary
format:

    offset  size  field
    0       4     magic ``4C 49 44 45`` (ASCII "LIDE")
    4       2     format version, currently 1          (u16, little-endian)
    6       2     flags; bit 0 set = float64 payload, clear = float32
    8       8     n_points                             (u64, little-endian)
    16      4     dim                                  (u32, little-endian)
    20      4     reserved, must be 0
    24      ...   payload, row-major, little-endian floats

Metadata travels in a JSON-lines sidecar next to the dump
(``<stem>.meta.jsonl``), one object per point, index-aligned with the
payload rows.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, FormatError, MetadataError
from .rng import STREAM_TOKENS, make_rng, shuffled_prefix

logger = logging.getLogger(__name__)

MAGIC = b"LIDE"
FORMAT_VERSION = 1
FLAG_FLOAT64 = 0x0001
_HEADER = struct.Struct("<4sHHQII")
HEADER_SIZE = _HEADER.size  # 24 bytes

META_SUFFIX = ".meta.jsonl"
_META_FIELDS = ("seq_id", "pos", "token_text", "layer", "mode")


@dataclass(frozen=True)
class TokenMeta:
    """Provenance of one embedding point: which token of which sequence."""

    seq_id: int
    pos: int
    token_text: str
    layer: int
    mode: str

    def __post_init__(self) -> None:
        if self.seq_id < 0:
            raise ValueError(f"seq_id must be non-negative, got {self.seq_id}")
        if self.pos < 0:
            raise ValueError(f"pos must be non-negative, got {self.pos}")
        if not isinstance(self.token_text, str):
            raise ValueError("token_text must be a string")
        if not isinstance(self.mode, str) or not self.mode:
            raise ValueError("mode must be a non-empty string")

    def to_dict(self) -> dict:
        return {
            "seq_id": self.seq_id,
            "pos": self.pos,
            "token_text": self.token_text,
            "layer": self.layer,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TokenMeta":
        missing = [k for k in _META_FIELDS if k not in record]
        if missing:
            raise ValueError(f"metadata record missing fields {missing}")
        return cls(
            seq_id=int(record["seq_id"]),
            pos=int(record["pos"]),
            token_text=str(record["token_text"]),
            layer=int(record["layer"]),
            mode=str(record["mode"]),
        )


@dataclass(frozen=True)
class PointCloud:
    """An (n_points, dim) float array plus optional aligned token metadata."""

    data: np.ndarray
    meta: Optional[tuple[TokenMeta, ...]] = None

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError(f"point cloud data must be 2-D, got shape {data.shape}")
        if data.dtype not in (np.float32, np.float64):
            data = data.astype(np.float64)
        object.__setattr__(self, "data", data)
        if self.meta is not None:
            meta = tuple(self.meta)
            if len(meta) != data.shape[0]:
                raise ValueError(
                    f"metadata has {len(meta)} records for {data.shape[0]} points"
                )
            object.__setattr__(self, "meta", meta)

    @property
    def n_points(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def take(self, indices: np.ndarray) -> "PointCloud":
        """Row-select a new cloud; metadata follows the same indices."""
        data = self.data[indices]
        meta = None
        if self.meta is not None:
            meta = tuple(self.meta[int(i)] for i in indices)
        return PointCloud(data=data, meta=meta)


@dataclass(frozen=True)
class SamplingConfig:
    """Knobs of the sampled local-estimation pipeline."""

    n_tokens: int = 60_000
    n_neighbors: int = 128
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_tokens < 1:
            raise ValueError(f"n_tokens must be positive, got {self.n_tokens}")
        if self.n_neighbors < 2:
            raise ValueError(
                f"n_neighbors must be at least 2, got {self.n_neighbors}"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


def meta_path_for(path: Path) -> Path:
    """Sidecar path for a dump: ``foo.bin`` -> ``foo.meta.jsonl``."""
    path = Path(path)
    return path.with_name(path.stem + META_SUFFIX)


def save_point_cloud(cloud: PointCloud, path: str | Path) -> None:
    """Write a cloud (and its metadata sidecar, if any) to disk."""
    path = Path(path)
    data = np.ascontiguousarray(cloud.data)
    flags = FLAG_FLOAT64 if data.dtype == np.float64 else 0
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, flags, cloud.n_points, cloud.dim, 0
    )
    payload = data.astype(data.dtype.newbyteorder("<"), copy=False)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())
    if cloud.meta is not None:
        with open(meta_path_for(path), "w", encoding="utf-8") as fh:
            for record in cloud.meta:
                fh.write(json.dumps(record.to_dict(), sort_keys=True))
                fh.write("\n")


def load_point_cloud(
    path: str | Path, ignore_meta_mismatch: bool = False
) -> PointCloud:
    """Read a cloud from disk, picking up the metadata sidecar if present.

    Raises :class:`FormatError` for structural problems with the dump,
    :class:`DataError` for non-finite payload values, and
    :class:`MetadataError` when a sidecar exists but does not line up with
    the dump (pass ``ignore_meta_mismatch=True`` to drop the sidecar and
    continue instead).
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, flags, n_points, dim, reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if reserved != 0:
        raise FormatError(f"{path}: reserved header field is {reserved}, expected 0")
    dtype = np.dtype("<f8") if flags & FLAG_FLOAT64 else np.dtype("<f4")
    expected = HEADER_SIZE + n_points * dim * dtype.itemsize
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, "
            f"found {len(raw)}"
        )
    data = np.frombuffer(raw, dtype=dtype, offset=HEADER_SIZE).reshape(
        int(n_points), int(dim)
    )
    data = data.astype(dtype.newbyteorder("="))  # native-endian, writable copy
    if not np.all(np.isfinite(data)):
        bad = int(np.count_nonzero(~np.isfinite(data)))
        raise DataError(f"{path}: payload contains {bad} non-finite values")

    meta: Optional[tuple[TokenMeta, ...]] = None
    sidecar = meta_path_for(path)
    if sidecar.exists():
        meta = _load_meta(sidecar, int(n_points), ignore_meta_mismatch)
    return PointCloud(data=data, meta=meta)


def _load_meta(
    sidecar: Path, n_points: int, ignore_mismatch: bool
) -> Optional[tuple[TokenMeta, ...]]:
    records = []
    with open(sidecar, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(TokenMeta.from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                raise MetadataError(f"{sidecar}:{lineno}: bad record: {exc}") from exc
    if len(records) != n_points:
        if ignore_mismatch:
            logger.warning(
                "%s: %d metadata records for %d points; proceeding without metadata",
                sidecar,
                len(records),
                n_points,
            )
            return None
        raise MetadataError(
            f"{sidecar}: {len(records)} metadata records for {n_points} points"
        )
    return tuple(records)


def deduplicate(cloud: PointCloud) -> PointCloud:
    """Drop bitwise-duplicate rows, keeping the first occurrence of each.

    Row order of the survivors is preserved, and metadata follows its rows.
    Equality is exact on the stored bytes: values that differ only in the
    last bit (or in the sign of zero) are distinct points.
    """
    if cloud.n_points == 0:
        return cloud
    data = np.ascontiguousarray(cloud.data)
    rows = data.view(np.dtype((np.void, data.dtype.itemsize * data.shape[1])))
    _, first_index = np.unique(rows.ravel(), return_index=True)
    keep = np.sort(first_index)
    n_dropped = cloud.n_points - len(keep)
    if n_dropped:
        logger.info("deduplicate: dropped %d duplicate points", n_dropped)
    return cloud.take(keep)


def subsample_tokens(cloud: PointCloud, n_tokens: int, seed: int) -> PointCloud:
    """Seeded uniform subsample of ``n_tokens`` points.

    Follows the shuffle-then-truncate convention: rows come back in shuffle
    order, and for a fixed seed the sample at a smaller ``n_tokens`` is a
    prefix of the sample at a larger one.  Asking for at least as many
    points as the cloud holds returns the cloud unchanged.
    """
    if n_tokens < 1:
        raise ValueError(f"n_tokens must be positive, got {n_tokens}")
    if n_tokens >= cloud.n_points:
        return cloud
    rng = make_rng(seed, STREAM_TOKENS)
    indices = shuffled_prefix(cloud.n_points, n_tokens, rng)
    return cloud.take(indices)
