"""Shared fixtures: synthetic cue datasets where context predicts the label.

Each label plants one giveaway context word next to the mask, so even a
small from-scratch encoder separates the classes within a few epochs.
"""

import json
import random
from pathlib import Path

import pytest

torch = pytest.importorskip("torch")

from meronomy_trainer.data import MASK

_FILLERS = ("the", "a", "my", "old", "new", "red", "small", "today", "still", "here")
ASPECT_CUES = {0: "broke", 1: "fits", 2: "overall"}
RELATION_CUES = {0: "versus", 1: "inside", 2: "around"}


def aspect_rows(n: int, seed: int = 5) -> list[dict]:
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        label = i % 3
        lead = [rng.choice(_FILLERS) for _ in range(rng.randint(1, 3))]
        tail = [rng.choice(_FILLERS) for _ in range(rng.randint(1, 3))]
        tokens = lead + [MASK, ASPECT_CUES[label]] + tail
        rows.append(
            {
                "sentence_id": f"a{i}",
                "tokens": tokens,
                "mask_positions": [len(lead)],
                "entities": [f"thing{i}"],
                "label": label,
                "task": "aspect",
            }
        )
    return rows


def relation_rows(n: int, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        label = i % 3
        lead = [rng.choice(_FILLERS) for _ in range(rng.randint(1, 2))]
        tail = [rng.choice(_FILLERS) for _ in range(rng.randint(1, 2))]
        tokens = lead + [MASK, RELATION_CUES[label], MASK] + tail
        rows.append(
            {
                "sentence_id": f"r{i}",
                "tokens": tokens,
                "mask_positions": [len(lead), len(lead) + 2],
                "entities": [f"part{i}", f"whole{i}"],
                "label": label,
                "task": "relation",
            }
        )
    return rows


def write_rows(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return path


@pytest.fixture(scope="session")
def aspect_dataset(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("aspect_data")
    return write_rows(root / "aspect_train.jsonl", aspect_rows(999))


@pytest.fixture(scope="session")
def relation_dataset(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("relation_data")
    return write_rows(root / "relation_train.jsonl", relation_rows(999))


@pytest.fixture(scope="session")
def aspect_artifact(aspect_dataset, tmp_path_factory) -> Path:
    from meronomy_trainer.train import TrainConfig, train

    out = tmp_path_factory.mktemp("aspect_model")
    cfg = TrainConfig(task="aspect", epochs=3, learning_rate=1e-3, seed=13)
    train(aspect_dataset, cfg, out)
    return out
