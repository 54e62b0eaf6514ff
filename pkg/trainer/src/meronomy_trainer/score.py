"""Batch inference: masked examples in, vote-triple JSONL out."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import torch

from .data import MASKS_PER_TASK, example_from_record, iter_records
from .model import collate
from .train import load_model

logger = logging.getLogger(__name__)


def score_file(
    artifact_dir: str | Path,
    examples_path: str | Path,
    out_path: str | Path,
    batch_size: int = 64,
) -> dict:
    """Score every well-formed example against the saved model.

    A record whose mask count does not fit the model's task, or that is
    otherwise malformed, is skipped with a logged warning; the rest are
    written as {sentence_id, task, p0, p1, p2} lines.
    """
    model, codec, task = load_model(artifact_dir)
    pending: list[tuple[str, tuple]] = []
    n_skipped = 0
    for lineno, obj in iter_records(examples_path):
        try:
            ex = example_from_record(obj)
            if ex.task != task:
                raise ValueError(
                    f"model scores {task} examples "
                    f"({MASKS_PER_TASK[task]} masks), record has {len(ex.mask_positions)}"
                )
            encoded = codec.encode(ex.tokens, ex.mask_positions)
        except ValueError as exc:
            logger.warning("%s:%d: skipped: %s", examples_path, lineno, exc)
            n_skipped += 1
            continue
        pending.append((ex.sentence_id, encoded + (None,)))

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    n_written = 0
    with out.open("w", encoding="utf-8") as fh:
        meta = {"_meta": {"task": task, "artifact": str(artifact_dir)}}
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        with torch.no_grad():
            for start in range(0, len(pending), batch_size):
                batch = pending[start : start + batch_size]
                input_ids, attention, positions, _ = collate([enc for _, enc in batch])
                logits = model(input_ids, attention, positions)
                # float64 softmax so the triples sum to 1 well inside tolerance
                probs = torch.softmax(logits.double(), dim=-1)
                for (sentence_id, _), p in zip(batch, probs):
                    rec = {
                        "sentence_id": sentence_id,
                        "task": task,
                        "p0": float(p[0]),
                        "p1": float(p[1]),
                        "p2": float(p[2]),
                    }
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
                    n_written += 1

    logger.info("scored %d examples, skipped %d, into %s", n_written, n_skipped, out)
    return {"task": task, "written": n_written, "skipped": n_skipped, "out": str(out)}
