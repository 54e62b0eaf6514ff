"""CBOW word embeddings with negative sampling, trained in-process.

Single-threaded numpy implementation so that a fixed seed gives a
byte-identical table. The context vector is the mean of the window's
input vectors; the input-side gradient is split evenly across the
context (divided by context size). Negative samples come from the
unigram distribution raised to 3/4.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMAT_NAME = "cbow-vectors"
FORMAT_VERSION = 1

_NOISE_POWER = 0.75
_MIN_LR = 1e-4


@dataclass
class EmbeddingTable:
    """Dense vectors for a fixed vocabulary, plus the training config."""

    terms: list[str]
    matrix: np.ndarray
    config: dict
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.terms)}
        if len(self._index) != len(self.terms):
            raise ValueError("duplicate terms in embedding vocabulary")
        if self.matrix.shape != (len(self.terms), self.d):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.terms)} terms of dimension {self.d}"
            )

    @property
    def d(self) -> int:
        return int(self.config["d"])

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def __len__(self) -> int:
        return len(self.terms)

    def index(self, term: str) -> int:
        if term not in self._index:
            raise KeyError(f"term {term!r} not in embedding vocabulary")
        return self._index[term]

    def vector(self, term: str) -> np.ndarray:
        return self.matrix[self.index(term)]

    def unit_matrix(self) -> np.ndarray:
        """Row-normalized copy; zero vectors stay zero."""
        norms = np.linalg.norm(self.matrix, axis=1, keepdims=True)
        safe = np.where(norms == 0.0, 1.0, norms)
        return self.matrix / safe

    def cosine(self, a: str, b: str) -> float:
        va, vb = self.vector(a), self.vector(b)
        na, nb = np.linalg.norm(va), np.linalg.norm(vb)
        if na == 0.0 or nb == 0.0:
            return 0.0
        return float(np.dot(va, vb) / (na * nb))

    def save(self, path: str | Path) -> None:
        header = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "count": len(self.terms),
            "config": self.config,
            "loss_history": self.loss_history,
        }
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for term, row in zip(self.terms, self.matrix):
                # %.17g round-trips float64 exactly, keeping reruns byte-identical.
                fh.write(term + " " + " ".join("%.17g" % x for x in row) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        with Path(path).open("r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != FORMAT_NAME:
                raise ValueError(f"{path}: not a {FORMAT_NAME} file")
            if header.get("version") != FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported version {header.get('version')!r}")
            d = int(header["config"]["d"])
            terms, rows = [], []
            for line in fh:
                parts = line.rstrip("\n").split(" ")
                if len(parts) != d + 1:
                    raise ValueError(f"{path}: vector row for {parts[0]!r} has wrong arity")
                terms.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        if len(terms) != header["count"]:
            raise ValueError(f"{path}: expected {header['count']} rows, found {len(terms)}")
        matrix = np.array(rows, dtype=np.float64).reshape(len(terms), d)
        return cls(
            terms=terms,
            matrix=matrix,
            config=header["config"],
            loss_history=list(header.get("loss_history", [])),
        )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def _build_vocab(
    corpus: list[tuple[str, ...]], min_count: int, keep_terms: set[str]
) -> tuple[list[str], dict[str, int], np.ndarray]:
    counts: dict[str, int] = {}
    for tokens in corpus:
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
    absent = keep_terms - set(counts)
    if absent:
        raise ValueError(f"keep_terms not present in the corpus at all: {sorted(absent)}")
    kept = {t: c for t, c in counts.items() if c >= min_count or t in keep_terms}
    dropped_floor = {t for t in keep_terms if counts[t] < min_count}
    if dropped_floor:
        logger.info(
            "keeping %d terms below the frequency floor: %s",
            len(dropped_floor),
            ", ".join(sorted(dropped_floor)),
        )
    if not kept:
        raise ValueError("no vocabulary terms at or above the frequency floor")
    terms = sorted(kept, key=lambda t: (-kept[t], t))
    index = {t: i for i, t in enumerate(terms)}
    freq = np.array([kept[t] for t in terms], dtype=np.float64)
    return terms, index, freq


def train_cbow(
    sentences: Iterable,
    d: int = 100,
    window: int = 4,
    seed: int = 0,
    epochs: int = 5,
    negatives: int = 5,
    min_count: int = 5,
    lr: float = 0.025,
    keep_terms: Sequence[str] = (),
) -> EmbeddingTable:
    """Train CBOW with negative sampling over tokenized sentences.

    `sentences` may be ReviewSentence objects or plain token sequences.
    Terms listed in `keep_terms` stay in the vocabulary even below the
    frequency floor (they must occur at least once). The learning rate
    decays linearly over all center positions across every epoch.
    """
    if d < 8:
        raise ValueError(f"embedding dimension must be >= 8, got {d}")
    if window < 1 or epochs < 1 or negatives < 1 or min_count < 1:
        raise ValueError("window, epochs, negatives, and min_count must all be >= 1")
    corpus = [tuple(getattr(s, "tokens", s)) for s in sentences]
    if not corpus:
        raise ValueError("cannot train embeddings on an empty corpus")

    terms, index, freq = _build_vocab(corpus, min_count, set(keep_terms))
    encoded = [
        np.array([index[t] for t in tokens if t in index], dtype=np.int64) for tokens in corpus
    ]
    encoded = [ids for ids in encoded if len(ids) >= 2]
    if not encoded:
        raise ValueError("no sentence has two or more in-vocabulary tokens")

    noise = freq**_NOISE_POWER
    noise_cdf = np.cumsum(noise / noise.sum())

    rng = np.random.Generator(np.random.PCG64(seed))
    vocab_size = len(terms)
    w_in = (rng.random((vocab_size, d)) - 0.5) / d
    w_out = np.zeros((vocab_size, d))

    positions_per_epoch = sum(len(ids) for ids in encoded)
    total_positions = positions_per_epoch * epochs
    seen = 0
    loss_history: list[float] = []

    for _epoch in range(epochs):
        epoch_loss = 0.0
        for ids in encoded:
            n = len(ids)
            for pos in range(n):
                alpha = max(_MIN_LR, lr * (1.0 - seen / total_positions))
                seen += 1
                lo, hi = max(0, pos - window), min(n, pos + window + 1)
                context = np.concatenate([ids[lo:pos], ids[pos + 1 : hi]])
                if len(context) == 0:
                    continue
                center = ids[pos]

                neg = np.searchsorted(noise_cdf, rng.random(negatives))
                neg = neg[neg != center]
                targets = np.concatenate([[center], neg])
                labels = np.zeros(len(targets))
                labels[0] = 1.0

                h = w_in[context].mean(axis=0)
                scores = w_out[targets] @ h
                f = _sigmoid(scores)
                # loss = -log sigma(s_pos) - sum log sigma(-s_neg)
                epoch_loss -= np.log(np.clip(f[0], 1e-12, None))
                epoch_loss -= np.log(np.clip(1.0 - f[1:], 1e-12, None)).sum()

                g = (labels - f) * alpha
                grad_h = g @ w_out[targets]
                w_out[targets] += np.outer(g, h)
                np.add.at(w_in, context, grad_h / len(context))
        loss_history.append(epoch_loss / positions_per_epoch)

    config = {
        "d": d,
        "window": window,
        "seed": seed,
        "epochs": epochs,
        "negatives": negatives,
        "min_count": min_count,
        "lr": lr,
    }
    return EmbeddingTable(terms=terms, matrix=w_in, config=config, loss_history=loss_history)
