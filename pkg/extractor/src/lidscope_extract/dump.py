"""Point-cloud dump writer.

Emits the binary format the analysis engine loads: a 24-byte
little-endian header -- magic ``LIDE``, format version 1, a flags word
whose bit 0 marks float64 payloads, point count (u64), dimension (u32),
reserved u32 -- followed by the row-major coordinate payload, plus a
``<stem>.meta.jsonl`` sidecar with one JSON record per point.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"LIDE"
FORMAT_VERSION = 1
FLAG_FLOAT64 = 0x0001
_HEADER = struct.Struct("<4sHHQII")

META_SUFFIX = ".meta.jsonl"
META_FIELDS = ("seq_id", "pos", "token_text", "layer", "mode")


def meta_path_for(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + META_SUFFIX)


def save_dump(
    path: str | Path,
    points: np.ndarray,
    meta: Sequence[dict],
) -> Path:
    """Write points (float32) and their metadata sidecar; returns the path."""
    data = np.ascontiguousarray(points, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {data.shape}")
    if len(meta) != data.shape[0]:
        raise ValueError(
            f"{len(meta)} metadata records for {data.shape[0]} points"
        )
    path = Path(path)
    lines = []
    for record in meta:
        missing = [k for k in META_FIELDS if k not in record]
        if missing:
            raise ValueError(f"metadata record is missing fields {missing}")
        lines.append(json.dumps({k: record[k] for k in META_FIELDS}, sort_keys=True))
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, 0, data.shape[0], data.shape[1], 0
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.astype("<f4", copy=False).tobytes(order="C"))
    text = "\n".join(lines) + "\n" if lines else ""
    meta_path_for(path).write_text(text, encoding="utf-8")
    return path
