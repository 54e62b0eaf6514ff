"""Fine-tuning loop and the saved model artifact."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from sklearn.metrics import accuracy_score, f1_score

from .data import (
    TASKS,
    LabeledExample,
    WordVocab,
    PretrainedCodec,
    check_labels,
    codec_from_json,
    read_examples,
    split_dataset,
    write_examples,
)
from .model import MaskedTokenClassifier, build_model, collate

logger = logging.getLogger(__name__)

DEFAULT_BATCH = {"aspect": 32, "relation": 16}
OPTIMIZERS = {"adam": torch.optim.Adam}

WEIGHTS_FILE = "weights.pt"
CONFIG_FILE = "config.json"
HELD_OUT_FILE = "held_out.jsonl"


@dataclass(frozen=True)
class TrainConfig:
    task: str
    epochs: int = 3
    batch_size: int | None = None  # task default when unset
    optimizer: str = "adam"
    held_out_fraction: float = 0.05
    learning_rate: float = 2e-5
    seed: int = 13
    encoder: str = "tiny"

    def resolved_batch_size(self) -> int:
        return self.batch_size if self.batch_size is not None else DEFAULT_BATCH[self.task]

    def validate(self) -> None:
        problems = []
        if self.task not in TASKS:
            problems.append(f"task must be one of {TASKS}, got {self.task!r}")
        if self.epochs < 1:
            problems.append("epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            problems.append(f"optimizer must be one of {sorted(OPTIMIZERS)}, got {self.optimizer!r}")
        if not (0.0 < self.held_out_fraction <= 0.5):
            problems.append("held_out_fraction must be in (0, 0.5]")
        if self.learning_rate <= 0.0:
            problems.append("learning_rate must be positive")
        if problems:
            raise ValueError("; ".join(problems))

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "epochs": self.epochs,
            "batch_size": self.resolved_batch_size(),
            "optimizer": self.optimizer,
            "held_out_fraction": self.held_out_fraction,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "encoder": self.encoder,
        }


@dataclass(frozen=True)
class TrainResult:
    task: str
    n_train: int
    n_held: int
    accuracy: float
    macro_f1: float
    loss_history: list[float]
    artifact_dir: Path

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "n_train": self.n_train,
            "n_held": self.n_held,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "loss_history": self.loss_history,
            "artifact_dir": str(self.artifact_dir),
        }


def _encode_all(codec, examples: list[LabeledExample]):
    return [codec.encode(ex.tokens, ex.mask_positions) + (ex.label,) for ex in examples]


def _batches(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


@torch.no_grad()
def _predict(model: MaskedTokenClassifier, encoded: list, batch_size: int) -> list[int]:
    model.eval()
    out = []
    for batch in _batches(encoded, batch_size):
        input_ids, attention, positions, _ = collate(batch)
        logits = model(input_ids, attention, positions)
        out.extend(int(k) for k in logits.argmax(dim=-1))
    return out


def train(dataset_path: str | Path, cfg: TrainConfig, out_dir: str | Path) -> TrainResult:
    """Fine-tune one classifier and write the model artifact.

    The artifact directory holds the weights, the vocabulary or
    tokenizer reference, the held-out slice, and the held-out metrics.
    """
    cfg.validate()
    examples = read_examples(dataset_path, task=cfg.task)
    train_ex, held_ex = split_dataset(examples, cfg.held_out_fraction, cfg.seed)
    check_labels(train_ex)

    if cfg.encoder == "tiny":
        codec = WordVocab.from_examples(examples)
        vocab_size = len(codec)
    else:
        codec = PretrainedCodec(cfg.encoder)
        vocab_size = None

    torch.manual_seed(cfg.seed)
    model = build_model(cfg.task, cfg.encoder, vocab_size)
    opt = OPTIMIZERS[cfg.optimizer](model.parameters(), lr=cfg.learning_rate)

    encoded_train = _encode_all(codec, train_ex)
    batch_size = cfg.resolved_batch_size()
    shuffler = random.Random(cfg.seed)
    loss_history = []
    model.train()
    for epoch in range(cfg.epochs):
        shuffler.shuffle(encoded_train)
        total, steps = 0.0, 0
        for batch in _batches(encoded_train, batch_size):
            input_ids, attention, positions, labels = collate(batch)
            opt.zero_grad()
            logits = model(input_ids, attention, positions)
            loss = torch.nn.functional.cross_entropy(logits, labels)
            loss.backward()
            opt.step()
            total += float(loss.detach())
            steps += 1
        loss_history.append(total / steps)
        logger.info("epoch %d/%d: mean loss %.4f", epoch + 1, cfg.epochs, loss_history[-1])

    encoded_held = _encode_all(codec, held_ex)
    predictions = _predict(model, encoded_held, batch_size)
    gold = [ex.label for ex in held_ex]
    accuracy = 100.0 * accuracy_score(gold, predictions)
    macro = 100.0 * f1_score(gold, predictions, average="macro", zero_division=0)
    logger.info(
        "%s: held-out accuracy %.2f%%, macro F1 %.2f%% on %d examples",
        cfg.task, accuracy, macro, len(held_ex),
    )

    artifact = Path(out_dir)
    artifact.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), artifact / WEIGHTS_FILE)
    doc = {
        "task": cfg.task,
        "codec": codec.to_json(),
        "train_config": cfg.to_json(),
        "metrics": {"accuracy": accuracy, "macro_f1": macro, "n_held": len(held_ex)},
    }
    (artifact / CONFIG_FILE).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_examples(artifact / HELD_OUT_FILE, held_ex)

    return TrainResult(
        task=cfg.task,
        n_train=len(train_ex),
        n_held=len(held_ex),
        accuracy=accuracy,
        macro_f1=macro,
        loss_history=loss_history,
        artifact_dir=artifact,
    )


def load_model(artifact_dir: str | Path) -> tuple[MaskedTokenClassifier, object, str]:
    """Restore (model in eval mode, codec, task) from an artifact directory."""
    artifact = Path(artifact_dir)
    config_path = artifact / CONFIG_FILE
    if not config_path.exists():
        raise FileNotFoundError(f"no model artifact at {artifact}")
    doc = json.loads(config_path.read_text(encoding="utf-8"))
    task = doc["task"]
    codec = codec_from_json(doc["codec"])
    encoder_name = doc["train_config"]["encoder"]
    vocab_size = len(codec) if encoder_name == "tiny" else None
    model = build_model(task, encoder_name, vocab_size)
    state = torch.load(artifact / WEIGHTS_FILE, map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model, codec, task
