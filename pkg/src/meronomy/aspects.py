"""Aggregate per-sentence aspect votes into per-entity aspect calls.

Each masked-entity sentence contributes one probability triple. An
entity with enough votes counts as an aspect when its mean aspect mass
(p1 + p2) exceeds the aspect threshold, and additionally as a product
aspect when its mean product mass (p2) exceeds the product threshold.
Both comparisons are strict.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .annotate import AspectExample
from .scoring import VoteTriple

ASPECT_THRESHOLD = 0.65
PRODUCT_THRESHOLD = 0.45
MIN_VOTES = 3


@dataclass(frozen=True)
class AspectStats:
    entity: str
    n_votes: int
    mean_aspect: float
    mean_product: float
    is_aspect: bool
    is_product: bool

    def to_json(self) -> dict:
        return {
            "entity": self.entity,
            "n_votes": self.n_votes,
            "mean_aspect": self.mean_aspect,
            "mean_product": self.mean_product,
            "is_aspect": self.is_aspect,
            "is_product": self.is_product,
        }


def aggregate_aspect_votes(
    examples: Iterable[AspectExample],
    votes: dict[tuple[str, str], VoteTriple] | Iterable[VoteTriple],
    aspect_threshold: float = ASPECT_THRESHOLD,
    product_threshold: float = PRODUCT_THRESHOLD,
    min_votes: int = MIN_VOTES,
) -> list[AspectStats]:
    """Mean the vote triples per entity and apply both thresholds.

    `votes` is either a mapping keyed by (sentence_id, "aspect") as
    loaded from an external score file, or an iterable parallel to
    `examples`. Entities with fewer than `min_votes` votes are dropped.
    Output is sorted by vote count descending, then entity name.
    """
    if min_votes < 1:
        raise ValueError(f"min_votes must be >= 1, got {min_votes}")
    examples = list(examples)
    if isinstance(votes, dict):
        triples = []
        for ex in examples:
            key = (ex.sentence_id, "aspect")
            if key not in votes:
                raise KeyError(f"no aspect score for sentence {ex.sentence_id!r}")
            triples.append(votes[key])
    else:
        triples = list(votes)
        if len(triples) != len(examples):
            raise ValueError(f"{len(examples)} examples but {len(triples)} vote triples")

    sums: dict[str, list[float]] = {}
    counts: dict[str, int] = {}
    for ex, triple in zip(examples, triples):
        acc = sums.setdefault(ex.entity, [0.0, 0.0])
        acc[0] += triple.p1 + triple.p2
        acc[1] += triple.p2
        counts[ex.entity] = counts.get(ex.entity, 0) + 1

    out = []
    for entity, n in counts.items():
        if n < min_votes:
            continue
        mean_aspect = sums[entity][0] / n
        mean_product = sums[entity][1] / n
        is_aspect = mean_aspect > aspect_threshold
        out.append(
            AspectStats(
                entity=entity,
                n_votes=n,
                mean_aspect=mean_aspect,
                mean_product=mean_product,
                is_aspect=is_aspect,
                is_product=is_aspect and mean_product > product_threshold,
            )
        )
    out.sort(key=lambda s: (-s.n_votes, s.entity))
    return out


def aspect_terms(stats: Iterable[AspectStats]) -> list[str]:
    return [s.entity for s in stats if s.is_aspect]


def product_terms(stats: Iterable[AspectStats]) -> list[str]:
    return [s.entity for s in stats if s.is_product]


def write_aspects(path: str | Path, stats: Iterable[AspectStats], meta: dict | None = None) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        if meta:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for s in stats:
            fh.write(json.dumps(s.to_json(), sort_keys=True) + "\n")
            n += 1
    return n


def read_aspects(path: str | Path) -> list[AspectStats]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            out.append(
                AspectStats(
                    entity=obj["entity"],
                    n_votes=obj["n_votes"],
                    mean_aspect=obj["mean_aspect"],
                    mean_product=obj["mean_product"],
                    is_aspect=obj["is_aspect"],
                    is_product=obj["is_product"],
                )
            )
    return out
