"""Collocation detection: join frequent token pairs into multi-word units.

A two-pass model joins bigrams on the first pass and, because a joined
bigram participates as a single token on the second pass, trigrams on
the second. Pairs are scored with the count-ratio collocation score

    score(a, b) = (count(a, b) - min_count) * total_tokens / (count(a) * count(b))

and joined with "_" when the score reaches the threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import ReviewSentence

FORMAT_VERSION = 1


@dataclass
class PhrasePass:
    """Counts for one joining pass over the corpus."""

    unigram_counts: dict[str, int] = field(default_factory=dict)
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    total_tokens: int = 0

    def add(self, tokens: tuple[str, ...]) -> None:
        for tok in tokens:
            self.unigram_counts[tok] = self.unigram_counts.get(tok, 0) + 1
        self.total_tokens += len(tokens)
        for a, b in zip(tokens, tokens[1:]):
            self.pair_counts[(a, b)] = self.pair_counts.get((a, b), 0) + 1


@dataclass
class PhraseModel:
    """A stack of joining passes sharing one score threshold."""

    min_count: int = 5
    threshold: float = 10.0
    passes: list[PhrasePass] = field(default_factory=list)

    def score(self, a: str, b: str, pass_idx: int = 0) -> float:
        """Collocation score of the adjacent pair (a, b) in one pass."""
        p = self.passes[pass_idx]
        pair = p.pair_counts.get((a, b), 0)
        ca = p.unigram_counts.get(a, 0)
        cb = p.unigram_counts.get(b, 0)
        if pair == 0 or ca == 0 or cb == 0:
            return float("-inf")
        return (pair - self.min_count) * p.total_tokens / (ca * cb)

    def save(self, path: str | Path, meta: dict | None = None) -> None:
        obj = {
            "version": FORMAT_VERSION,
            "min_count": self.min_count,
            "threshold": self.threshold,
            "passes": [
                {
                    "unigram_counts": p.unigram_counts,
                    "pair_counts": {f"{a} {b}": c for (a, b), c in p.pair_counts.items()},
                    "total_tokens": p.total_tokens,
                }
                for p in self.passes
            ],
        }
        if meta:
            obj["_meta"] = meta
        Path(path).write_text(json.dumps(obj, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PhraseModel":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if obj.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported phrase model version: {obj.get('version')!r}")
        model = cls(min_count=obj["min_count"], threshold=obj["threshold"])
        for p in obj["passes"]:
            model.passes.append(
                PhrasePass(
                    unigram_counts=dict(p["unigram_counts"]),
                    pair_counts={tuple(k.split(" ", 1)): c for k, c in p["pair_counts"].items()},
                    total_tokens=p["total_tokens"],
                )
            )
        return model


def learn_phrases(
    sentences: Iterable[ReviewSentence],
    passes: int = 2,
    min_count: int = 5,
    threshold: float = 10.0,
) -> PhraseModel:
    """Learn a phrase model from a sentence corpus.

    With passes=2 the second pass counts over pass-1 output, so joined
    bigrams can combine with a neighbor into trigrams. Raises ValueError
    on an empty corpus.
    """
    if passes not in (1, 2):
        raise ValueError(f"passes must be 1 or 2, got {passes}")
    model = PhraseModel(min_count=min_count, threshold=threshold)
    corpus = list(sentences)
    if not corpus:
        raise ValueError("cannot learn phrases from an empty corpus")
    for _ in range(passes):
        p = PhrasePass()
        for sent in corpus:
            p.add(_join_pass(model, sent.tokens))
        model.passes.append(p)
    return model


def _join_pass(model: PhraseModel, tokens: tuple[str, ...]) -> tuple[str, ...]:
    """Apply all learned passes so far to a token sequence."""
    for idx in range(len(model.passes)):
        tokens = _join_once(model, tokens, idx)
    return tokens


def _join_once(model: PhraseModel, tokens: tuple[str, ...], pass_idx: int) -> tuple[str, ...]:
    # Greedy left-to-right: the left pair wins overlapping candidates,
    # and a freshly joined token does not re-join within the same pass.
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if i + 1 < len(tokens) and model.score(tokens[i], tokens[i + 1], pass_idx) >= model.threshold:
            out.append(tokens[i] + "_" + tokens[i + 1])
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return tuple(out)


def apply_phrases(model: PhraseModel, sentence: ReviewSentence) -> ReviewSentence:
    """Return the sentence with all learned joins applied."""
    if not model.passes:
        raise ValueError("phrase model has no trained passes")
    joined = _join_pass(model, sentence.tokens)
    if joined == sentence.tokens:
        return sentence
    return ReviewSentence(
        sentence_id=sentence.sentence_id,
        tokens=joined,
        raw=sentence.raw,
        category=sentence.category,
    )
