"""Checkpoint loading and per-token hidden-state extraction.

Regular mode runs one forward pass per sequence (batched, with
automatic batch-size backoff on out-of-memory errors) and exports every
content token's hidden state. Masked mode runs one forward pass per
content token -- the token is replaced by the tokenizer's mask token
and the hidden state at that position is exported -- so a sequence with
k content tokens costs exactly k passes.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .corpus import read_corpus, select_sequences
from .dump import save_dump
from .errors import JobError
from .job import ExtractionJob

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JobReport:
    """What a finished job did: counts, artifact paths, and log notes."""

    job: dict
    n_sequences_selected: int
    n_sequences_used: int
    content_tokens_total: int
    n_model_calls: int
    n_forward_passes: int
    points_per_layer: dict[int, int]
    files: dict[int, str]
    log: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "job": self.job,
            "n_sequences_selected": self.n_sequences_selected,
            "n_sequences_used": self.n_sequences_used,
            "content_tokens_total": self.content_tokens_total,
            "n_model_calls": self.n_model_calls,
            "n_forward_passes": self.n_forward_passes,
            "points_per_layer": {str(k): v for k, v in self.points_per_layer.items()},
            "files": {str(k): v for k, v in self.files.items()},
            "log": list(self.log),
        }


def _load_checkpoint(job: ExtractionJob):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(job.model)
        model = AutoModel.from_pretrained(job.model)
    except (OSError, ValueError) as exc:
        raise JobError(f"cannot load checkpoint {job.model!r}: {exc}") from exc
    model.eval()
    model.to(job.device)
    return tokenizer, model


def _resolve_layers(requested: tuple[int, ...], n_states: int) -> dict[int, int]:
    """Map requested layer indices onto the hidden-state stack.

    The stack has ``n_states`` entries: index 0 is the embedding output,
    1..n the transformer layers; negatives count from the end.
    """
    resolved = {}
    for layer in requested:
        idx = layer if layer >= 0 else n_states + layer
        if not 0 <= idx < n_states:
            raise JobError(
                f"layer {layer} is outside this model's hidden-state stack "
                f"(embedding output + {n_states - 1} layers)"
            )
        resolved[layer] = idx
    return resolved


def _encode(tokenizer, text: str, max_length: int) -> tuple[list[int], list[int]]:
    """Token ids and the positions of content (non-special) tokens."""
    enc = tokenizer(
        text,
        truncation=True,
        max_length=max_length,
        return_special_tokens_mask=True,
    )
    ids = list(enc["input_ids"])
    special = enc["special_tokens_mask"]
    content = [i for i, flag in enumerate(special) if not flag]
    return ids, content


def _meta_rows(seq_id: int, content: list[int], tokens: list[str], layer: int, mode: str):
    return [
        {
            "seq_id": seq_id,
            "pos": pos,
            "token_text": token,
            "layer": layer,
            "mode": mode,
        }
        for pos, token in zip(content, tokens)
    ]


def _extract_regular(
    job, tokenizer, model, encoded, layer_index, points, meta, counters, log
) -> None:
    pad_id = tokenizer.pad_token_id
    fill = pad_id if pad_id is not None else 0
    batch = job.batch_size
    i = 0
    with torch.no_grad():
        while i < len(encoded):
            chunk = encoded[i : i + batch]
            width = max(len(ids) for _, ids, _ in chunk)
            input_ids = torch.full((len(chunk), width), fill, dtype=torch.long)
            attention = torch.zeros((len(chunk), width), dtype=torch.long)
            for row, (_, ids, _) in enumerate(chunk):
                input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
                attention[row, : len(ids)] = 1
            try:
                output = model(
                    input_ids=input_ids.to(job.device),
                    attention_mask=attention.to(job.device),
                    output_hidden_states=True,
                )
            except RuntimeError as exc:
                if "out of memory" not in str(exc).lower() or len(chunk) == 1:
                    raise
                batch = max(1, len(chunk) // 2)
                note = f"forward pass ran out of memory; retrying with batch size {batch}"
                log.append(note)
                logger.warning(note)
                continue
            counters["model_calls"] += 1
            counters["forward_passes"] += len(chunk)
            hidden = output.hidden_states
            for row, (seq_id, ids, content) in enumerate(chunk):
                tokens = tokenizer.convert_ids_to_tokens([ids[p] for p in content])
                for layer, idx in layer_index.items():
                    vecs = hidden[idx][row, content].cpu().numpy()
                    points[layer].append(np.asarray(vecs, dtype=np.float32))
                    meta[layer].extend(
                        _meta_rows(seq_id, content, tokens, layer, job.mode)
                    )
            i += len(chunk)


def _extract_masked(
    job, tokenizer, model, encoded, layer_index, points, meta, counters
) -> None:
    mask_id = tokenizer.mask_token_id
    with torch.no_grad():
        for seq_id, ids, content in encoded:
            base = torch.tensor(ids, dtype=torch.long)
            tokens = tokenizer.convert_ids_to_tokens([ids[p] for p in content])
            rows = {layer: [] for layer in layer_index}
            for pos in content:
                variant = base.clone()
                variant[pos] = mask_id
                output = model(
                    input_ids=variant.unsqueeze(0).to(job.device),
                    output_hidden_states=True,
                )
                counters["model_calls"] += 1
                counters["forward_passes"] += 1
                for layer, idx in layer_index.items():
                    vec = output.hidden_states[idx][0, pos].cpu().numpy()
                    rows[layer].append(np.asarray(vec, dtype=np.float32))
            for layer in layer_index:
                points[layer].append(np.vstack(rows[layer]))
                meta[layer].extend(
                    _meta_rows(seq_id, content, tokens, layer, job.mode)
                )


def run_job(job: ExtractionJob) -> JobReport:
    """Execute one extraction job end to end and write its artifacts."""
    log: list[str] = []
    sequences = read_corpus(job.corpus, job.corpus_kind, job.jsonl_field)
    selected, note = select_sequences(sequences, job.m_sequences, job.seed)
    if note:
        log.append(note)
        logger.info(note)
    tokenizer, model = _load_checkpoint(job)
    if job.mode == "masked" and tokenizer.mask_token_id is None:
        raise JobError(
            "masked mode needs a masked-language-model checkpoint; "
            f"the tokenizer of {job.model!r} has no mask token"
        )
    n_states = int(model.config.num_hidden_layers) + 1
    layer_index = _resolve_layers(job.layers, n_states)

    encoded = []
    for seq_id, text in enumerate(selected):
        ids, content = _encode(tokenizer, text, job.max_length)
        if not content:
            note = f"sequence {seq_id} has no content tokens; skipped"
            log.append(note)
            logger.info(note)
            continue
        encoded.append((seq_id, ids, content))
    if not encoded:
        raise JobError("no selected sequence produced any content tokens")
    total_tokens = sum(len(content) for _, _, content in encoded)

    if job.mode == "masked":
        note = (
            f"masked mode runs one forward pass per content token: "
            f"{total_tokens} passes over {len(encoded)} sequences"
        )
        log.append(note)
        logger.warning(note)

    points: dict[int, list[np.ndarray]] = {layer: [] for layer in job.layers}
    meta: dict[int, list[dict]] = {layer: [] for layer in job.layers}
    counters = {"model_calls": 0, "forward_passes": 0}
    if job.mode == "regular":
        _extract_regular(
            job, tokenizer, model, encoded, layer_index, points, meta, counters, log
        )
    else:
        _extract_masked(
            job, tokenizer, model, encoded, layer_index, points, meta, counters
        )

    out_dir = Path(job.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: dict[int, str] = {}
    per_layer: dict[int, int] = {}
    for layer in job.layers:
        data = np.vstack(points[layer])
        path = out_dir / f"{job.split}.{job.mode}.L{layer}.bin"
        save_dump(path, data, meta[layer])
        files[layer] = str(path)
        per_layer[layer] = int(data.shape[0])
    report = JobReport(
        job=job.to_dict(),
        n_sequences_selected=len(selected),
        n_sequences_used=len(encoded),
        content_tokens_total=total_tokens,
        n_model_calls=counters["model_calls"],
        n_forward_passes=counters["forward_passes"],
        points_per_layer=per_layer,
        files=files,
        log=tuple(log),
    )
    (out_dir / "job_report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return report
