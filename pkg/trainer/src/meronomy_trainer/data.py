"""Masked-example datasets: parsing, vocabulary, and the train/test split.

The input is JSON Lines, one example per line, with fields sentence_id,
tokens, mask_positions, entities, label, and task. Aspect records carry
one masked position and one entity; relation records carry two of each,
in textual order. Both use "[MASK]" as the placeholder inside tokens. A
leading {"_meta": ...} line and blank lines are ignored.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

logger = logging.getLogger(__name__)

MASK = "[MASK]"
TASKS = ("aspect", "relation")
MASKS_PER_TASK = {"aspect": 1, "relation": 2}

# Reserved vocabulary rows; everything else is assigned alphabetically.
PAD_ID = 0
UNK_ID = 1
MASK_ID = 2
_SPECIALS = ("[PAD]", "[UNK]", MASK)


@dataclass(frozen=True)
class LabeledExample:
    sentence_id: str
    task: str
    tokens: tuple[str, ...]
    mask_positions: tuple[int, ...]
    entities: tuple[str, ...]
    label: int | None

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
            "mask_positions": list(self.mask_positions),
            "entities": list(self.entities),
            "label": self.label,
            "task": self.task,
        }


def example_from_record(obj: dict) -> LabeledExample:
    """Build one example from a parsed JSONL record, validating the masks."""
    try:
        task = obj["task"]
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        tokens = tuple(str(t) for t in obj["tokens"])
        positions = tuple(int(p) for p in obj["mask_positions"])
        entities = tuple(str(e) for e in obj["entities"])
        label = obj.get("label")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed example record: {exc}") from exc
    if label is not None:
        label = int(label)
        if label not in (0, 1, 2):
            raise ValueError(f"label must be 0, 1, or 2, got {label}")
    if len(positions) != MASKS_PER_TASK[task]:
        raise ValueError(
            f"{task} example needs {MASKS_PER_TASK[task]} masked positions, "
            f"found {len(positions)}"
        )
    if len(entities) != len(positions):
        raise ValueError(
            f"{len(positions)} masked positions but {len(entities)} entities"
        )
    for pos in positions:
        if not (0 <= pos < len(tokens)):
            raise ValueError(f"mask position {pos} outside sentence of {len(tokens)} tokens")
        if tokens[pos] != MASK:
            raise ValueError(f"token at position {pos} is {tokens[pos]!r}, not {MASK}")
    return LabeledExample(
        sentence_id=str(obj["sentence_id"]),
        task=task,
        tokens=tokens,
        mask_positions=positions,
        entities=entities,
        label=label,
    )


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line number, parsed object) for every data line in the file."""
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if "_meta" in obj:
                continue
            yield lineno, obj


def read_examples(path: str | Path, task: str | None = None) -> list[LabeledExample]:
    """Strict loader: any malformed or off-task record is a hard error."""
    out = []
    for lineno, obj in iter_records(path):
        try:
            ex = example_from_record(obj)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
        if task is not None and ex.task != task:
            raise ValueError(f"{path}:{lineno}: expected {task} records, found {ex.task}")
        out.append(ex)
    return out


def write_examples(path: str | Path, examples: list[LabeledExample]) -> int:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), sort_keys=True) + "\n")
    return len(examples)


def split_dataset(
    examples: list[LabeledExample], held_out_fraction: float, seed: int
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Deterministic shuffle, then carve the held-out testing slice."""
    if not (0.0 < held_out_fraction <= 0.5):
        raise ValueError(f"held_out_fraction must be in (0, 0.5], got {held_out_fraction}")
    n = len(examples)
    n_held = max(1, round(n * held_out_fraction))
    if n < 2 or n - n_held < 1:
        raise ValueError(f"dataset of {n} examples is too small to split")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    held = [examples[i] for i in order[:n_held]]
    train = [examples[i] for i in order[n_held:]]
    return train, held


def check_labels(examples: list[LabeledExample]) -> None:
    """Training data must be fully labeled and cover all three classes."""
    labels = [ex.label for ex in examples]
    if any(lb is None for lb in labels):
        raise ValueError("training data contains unlabeled examples")
    missing = sorted({0, 1, 2} - set(labels))
    if missing:
        raise ValueError(f"training data has no examples with labels {missing}")
    counts = {lb: labels.count(lb) for lb in (0, 1, 2)}
    if max(counts.values()) > 2 * min(counts.values()):
        logger.warning("class counts %s are far from balanced", counts)


@dataclass
class WordVocab:
    """Whole-word vocabulary for models trained from scratch."""

    tokens: list[str]

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if self.tokens[: len(_SPECIALS)] != list(_SPECIALS):
            raise ValueError(f"vocabulary must start with {_SPECIALS}")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_examples(cls, examples: list[LabeledExample]) -> "WordVocab":
        seen = sorted({t for ex in examples for t in ex.tokens} - set(_SPECIALS))
        return cls(tokens=list(_SPECIALS) + seen)

    def encode(
        self, tokens: tuple[str, ...], mask_positions: tuple[int, ...]
    ) -> tuple[list[int], list[int]]:
        ids = [self._index.get(t, UNK_ID) for t in tokens]
        return ids, list(mask_positions)

    def to_json(self) -> dict:
        return {"kind": "word", "tokens": self.tokens}


class PretrainedCodec:
    """Subword tokenizer wrapper for a published checkpoint.

    Re-tokenizes the whole-word examples and maps each masked word to
    the position of its first subtoken.
    """

    def __init__(self, name_or_path: str):
        from transformers import AutoTokenizer

        self.name = name_or_path
        self.tokenizer = AutoTokenizer.from_pretrained(name_or_path)

    def encode(
        self, tokens: tuple[str, ...], mask_positions: tuple[int, ...]
    ) -> tuple[list[int], list[int]]:
        enc = self.tokenizer(list(tokens), is_split_into_words=True, truncation=True)
        word_ids = enc.word_ids()
        positions = []
        for target in mask_positions:
            sub = [i for i, w in enumerate(word_ids) if w == target]
            if not sub:
                raise ValueError(f"masked word {target} was truncated away")
            positions.append(sub[0])
        return enc["input_ids"], positions

    def to_json(self) -> dict:
        return {"kind": "pretrained", "name": self.name}


def codec_from_json(obj: dict):
    if obj["kind"] == "word":
        return WordVocab(tokens=list(obj["tokens"]))
    if obj["kind"] == "pretrained":
        return PretrainedCodec(obj["name"])
    raise ValueError(f"unknown codec kind {obj['kind']!r}")
