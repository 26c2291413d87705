"""Corpus reading, normalization, and seeded sequence selection."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import JobError
from .job import CORPUS_KINDS


def _is_heading(line: str) -> bool:
    return len(line) >= 2 and line.startswith("=") and line.endswith("=")


def read_corpus(path: str | Path, kind: str, jsonl_field: str = "text") -> list[str]:
    """Read one sequence per line, normalized according to ``kind``.

    ``plain-text-lines`` and ``jsonl-field`` pass every record through
    with surrounding whitespace stripped; ``wiki-style`` additionally
    drops heading lines (``= Title =``) and empty lines. File order is
    preserved.
    """
    if kind not in CORPUS_KINDS:
        raise JobError(f"unknown corpus kind {kind!r}; supported: {CORPUS_KINDS}")
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise JobError(f"cannot read corpus {path}: {exc}") from exc
    if kind == "plain-text-lines":
        return [line.strip() for line in lines]
    if kind == "jsonl-field":
        sequences = []
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JobError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(record, dict) or jsonl_field not in record:
                raise JobError(
                    f"{path}:{lineno}: record has no {jsonl_field!r} field"
                )
            sequences.append(str(record[jsonl_field]).strip())
        return sequences
    stripped = (line.strip() for line in lines)
    return [line for line in stripped if line and not _is_heading(line)]


def select_sequences(
    sequences: list[str], m_sequences: int | None, seed: int
) -> tuple[list[str], str | None]:
    """Seeded shuffle of the split, truncated to the first M sequences.

    Returns the selection and an optional note for the job log (set when
    M meets or exceeds the split size, in which case the whole split is
    used).
    """
    if not sequences:
        raise JobError("corpus has no sequences")
    order = np.random.default_rng(seed).permutation(len(sequences))
    shuffled = [sequences[i] for i in order]
    if m_sequences is None:
        return shuffled, None
    if m_sequences >= len(sequences):
        return shuffled, (
            f"requested {m_sequences} sequences but the split has "
            f"{len(sequences)}; using the whole split"
        )
    return shuffled[:m_sequences], None
