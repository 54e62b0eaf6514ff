"""Scorer interface: probability triples over masked examples.

A scorer maps a masked example to a probability triple over the three
labels of its task. The pipeline treats scorers as interchangeable:
a trained classifier running elsewhere can hand its predictions over
as a JSONL file, a naive Bayes baseline runs in-process, and synthetic
corpora ship ground truth an oracle scorer reads directly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Protocol

from .annotate import AspectExample, RelationExample

logger = logging.getLogger(__name__)

_TRIPLE_TOL = 1e-6


class ScorerUnavailable(RuntimeError):
    """A scorer backend cannot produce scores.

    `transient` distinguishes retry-worthy conditions (a service hiccup)
    from permanent ones (no model artifact configured).
    """

    def __init__(self, message: str, transient: bool = False):
        super().__init__(message)
        self.transient = transient


@dataclass(frozen=True)
class VoteTriple:
    """Probabilities for labels 0, 1, 2. Must sum to 1 within 1e-6."""

    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        for name, p in (("p0", self.p0), ("p1", self.p1), ("p2", self.p2)):
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise ValueError(f"{name}={p!r} outside [0, 1]")
        total = self.p0 + self.p1 + self.p2
        if abs(total - 1.0) > _TRIPLE_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.p2)

    def argmax(self) -> int:
        return max(range(3), key=lambda i: self.as_tuple()[i])


@dataclass(frozen=True)
class ScoreRecord:
    """One scored example, keyed by sentence id and task."""

    sentence_id: str
    task: str
    votes: VoteTriple

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "task": self.task,
            "p0": self.votes.p0,
            "p1": self.votes.p1,
            "p2": self.votes.p2,
        }


class Scorer(Protocol):
    def score(self, example: AspectExample | RelationExample) -> VoteTriple: ...


class BaselineScorer:
    """Multinomial naive Bayes over unmasked context tokens.

    Uniform class priors, add-one smoothing, and unknown tokens are
    skipped rather than smoothed, so a sentence with no informative
    token at all scores exactly (1/3, 1/3, 1/3).
    """

    def __init__(self):
        self._counts: dict[str, list[dict[str, int]]] = {
            "aspect": [{}, {}, {}],
            "relation": [{}, {}, {}],
        }
        self._totals: dict[str, list[int]] = {"aspect": [0, 0, 0], "relation": [0, 0, 0]}
        self._vocab: dict[str, set[str]] = {"aspect": set(), "relation": set()}

    @staticmethod
    def _task_of(example) -> str:
        return "aspect" if isinstance(example, AspectExample) else "relation"

    @staticmethod
    def _context(example) -> list[str]:
        masked = (
            {example.mask_position}
            if isinstance(example, AspectExample)
            else set(example.mask_positions)
        )
        return [t for i, t in enumerate(example.tokens) if i not in masked]

    def fit(self, examples: Iterable[AspectExample | RelationExample]) -> "BaselineScorer":
        for ex in examples:
            task = self._task_of(ex)
            counts = self._counts[task][ex.label]
            for tok in self._context(ex):
                counts[tok] = counts.get(tok, 0) + 1
                self._totals[task][ex.label] += 1
                self._vocab[task].add(tok)
        return self

    def score(self, example: AspectExample | RelationExample) -> VoteTriple:
        task = self._task_of(example)
        vocab = self._vocab[task]
        if not vocab:
            raise ScorerUnavailable(f"baseline scorer was not fitted for task {task!r}")
        v = len(vocab)
        logp = [0.0, 0.0, 0.0]
        for tok in self._context(example):
            if tok not in vocab:
                continue
            for label in range(3):
                num = self._counts[task][label].get(tok, 0) + 1
                den = self._totals[task][label] + v
                logp[label] += math.log(num / den)
        peak = max(logp)
        weights = [math.exp(lp - peak) for lp in logp]
        z = sum(weights)
        return VoteTriple(weights[0] / z, weights[1] / z, weights[2] / z)


class OracleScorer:
    """Reads ground truth emitted alongside a synthetic corpus.

    Aspect truth maps entity -> "product" | "feature" | "other";
    relation truth is the set of (descendant, ancestor) term pairs.
    """

    def __init__(self, aspect_truth: dict[str, str], descendant_pairs: set[tuple[str, str]]):
        self._aspect = aspect_truth
        self._desc = descendant_pairs

    @classmethod
    def from_truth_file(cls, path: str | Path) -> "OracleScorer":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        pairs = {(d, a) for d, a in obj["descendant_pairs"]}
        return cls(aspect_truth=obj["aspect_labels"], descendant_pairs=pairs)

    def score(self, example: AspectExample | RelationExample) -> VoteTriple:
        if isinstance(example, AspectExample):
            kind = self._aspect.get(example.entity, "other")
            if kind == "product":
                return VoteTriple(0.0, 0.0, 1.0)
            if kind == "feature":
                return VoteTriple(0.0, 1.0, 0.0)
            return VoteTriple(1.0, 0.0, 0.0)
        a1, a2 = example.aspects
        if (a2, a1) in self._desc:
            return VoteTriple(0.0, 1.0, 0.0)
        if (a1, a2) in self._desc:
            return VoteTriple(0.0, 0.0, 1.0)
        return VoteTriple(1.0, 0.0, 0.0)


def score_examples(
    scorer: Scorer, examples: Iterable[AspectExample | RelationExample]
) -> Iterator[ScoreRecord]:
    for ex in examples:
        task = "aspect" if isinstance(ex, AspectExample) else "relation"
        yield ScoreRecord(sentence_id=ex.sentence_id, task=task, votes=scorer.score(ex))


def write_scores(path: str | Path, records: Iterable[ScoreRecord], meta: dict | None = None) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        if meta:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            n += 1
    return n


def load_external_scores(path: str | Path) -> dict[tuple[str, str], VoteTriple]:
    """Load scores produced out of process, keyed by (sentence_id, task).

    Malformed triples and duplicate keys are hard errors naming the
    offending line; a scorer that emits garbage should fail loudly here
    rather than silently skew the vote matrix downstream.
    """
    out: dict[tuple[str, str], VoteTriple] = {}
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
            try:
                key = (obj["sentence_id"], obj["task"])
                triple = VoteTriple(float(obj["p0"]), float(obj["p1"]), float(obj["p2"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: invalid score record: {exc}") from exc
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate score for {key}")
            out[key] = triple
    return out
