"""Extraction job description and its TOML form.

A job is one (corpus, checkpoint, mode) run. The TOML file holds a flat
table of the same keys as the dataclass; unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import JobError

CORPUS_KINDS = ("plain-text-lines", "jsonl-field", "wiki-style")
MODES = ("regular", "masked")

_REQUIRED = ("corpus", "corpus_kind", "model", "layers", "mode", "out")


@dataclass(frozen=True)
class ExtractionJob:
    """Everything needed to turn a corpus + checkpoint into dumps.

    ``layers`` indexes the model's hidden-state stack: 0 is the
    embedding output, 1..n the transformer layer outputs, and negative
    values count from the end (-1 = final layer).
    """

    corpus: str
    corpus_kind: str
    model: str
    layers: tuple[int, ...]
    mode: str
    out: str
    split: str = "data"
    m_sequences: Optional[int] = None
    seed: int = 0
    max_length: int = 128
    batch_size: int = 8
    jsonl_field: str = "text"
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.corpus_kind not in CORPUS_KINDS:
            raise JobError(
                f"corpus_kind must be one of {CORPUS_KINDS}, got {self.corpus_kind!r}"
            )
        if self.mode not in MODES:
            raise JobError(f"mode must be one of {MODES}, got {self.mode!r}")
        layers = tuple(self.layers)
        if not layers:
            raise JobError("layers must name at least one layer")
        if any(not isinstance(v, int) or isinstance(v, bool) for v in layers):
            raise JobError(f"layers must be integers, got {self.layers!r}")
        if len(set(layers)) != len(layers):
            raise JobError(f"layers contains duplicates: {self.layers!r}")
        object.__setattr__(self, "layers", layers)
        if self.m_sequences is not None and self.m_sequences < 1:
            raise JobError(f"m_sequences must be positive, got {self.m_sequences}")
        if self.seed < 0:
            raise JobError(f"seed must be non-negative, got {self.seed}")
        if self.max_length < 2:
            raise JobError(f"max_length must be at least 2, got {self.max_length}")
        if self.batch_size < 1:
            raise JobError(f"batch_size must be positive, got {self.batch_size}")
        if not self.split:
            raise JobError("split label must be non-empty")

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "corpus_kind": self.corpus_kind,
            "model": self.model,
            "layers": list(self.layers),
            "mode": self.mode,
            "out": self.out,
            "split": self.split,
            "m_sequences": self.m_sequences,
            "seed": self.seed,
            "max_length": self.max_length,
            "batch_size": self.batch_size,
            "jsonl_field": self.jsonl_field,
            "device": self.device,
        }


def load_job(path: str | Path) -> ExtractionJob:
    """Parse a job TOML file into a validated :class:`ExtractionJob`."""
    try:
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise JobError(f"cannot read job file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise JobError(f"job file {path} is not valid TOML: {exc}") from exc
    known = {f.name for f in fields(ExtractionJob)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise JobError(f"unknown job keys {unknown}; known keys: {sorted(known)}")
    missing = sorted(k for k in _REQUIRED if k not in raw)
    if missing:
        raise JobError(f"job file {path} is missing required keys {missing}")
    if "layers" in raw and isinstance(raw["layers"], list):
        raw = {**raw, "layers": tuple(raw["layers"])}
    try:
        return ExtractionJob(**raw)
    except TypeError as exc:
        raise JobError(f"bad job description: {exc}") from exc
