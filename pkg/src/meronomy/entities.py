"""Frequent noun-entity extraction from the phrased corpus."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import ReviewSentence
from .postag import Tagger, tag_nouns


@dataclass(frozen=True)
class EntityCount:
    entity: str
    count: int


def count_noun_occurrences(sentences: Iterable[ReviewSentence], tagger: Tagger) -> Counter:
    """Count every token occurrence judged a noun in its sentence."""
    counts: Counter = Counter()
    for sent in sentences:
        nouns = tag_nouns(sent, tagger)
        if not nouns:
            continue
        for tok in sent.tokens:
            if tok in nouns:
                counts[tok] += 1
    return counts


def top_entities(
    sentences: Iterable[ReviewSentence],
    tagger: Tagger,
    n: int = 200,
) -> list[EntityCount]:
    """The n most frequent noun entities, ties broken lexicographically.

    The result depends only on the corpus multiset: descending count,
    then ascending entity string. Empty corpus yields an empty list.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts = count_noun_occurrences(sentences, tagger)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [EntityCount(entity=e, count=c) for e, c in ranked[:n]]


def count_term_occurrences(
    sentences: Iterable[ReviewSentence], terms: Iterable[str]
) -> dict[str, int]:
    """Total corpus occurrences of each given term (0 if never seen)."""
    wanted = set(terms)
    counts = {t: 0 for t in wanted}
    for sent in sentences:
        for tok in sent.tokens:
            if tok in wanted:
                counts[tok] += 1
    return counts


def write_entities(path: str | Path, by_category: Mapping[str, list[EntityCount]], meta: dict | None = None) -> None:
    obj: dict = {"version": 1}
    if meta:
        obj.update(meta)
    obj["categories"] = {
        cat: [{"entity": ec.entity, "count": ec.count} for ec in ecs]
        for cat, ecs in by_category.items()
    }
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_entities(path: str | Path) -> dict[str, list[EntityCount]]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        cat: [EntityCount(entity=d["entity"], count=d["count"]) for d in rows]
        for cat, rows in obj["categories"].items()
    }
