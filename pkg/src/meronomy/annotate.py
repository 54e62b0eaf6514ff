"""Distant supervision: masked, labeled examples from a seed ontology.

Sentences are matched against a small hand-written ontology per product
category. For the aspect task, sentences with exactly one frequent
entity get that entity masked and labeled 0 (non-aspect), 1 (feature
aspect), or 2 (product aspect). For the relation task, sentences with
exactly two seed terms get both masked and labeled 0 (unrelated),
1 (second is a feature of the first), or 2 (first is a feature of the
second), where "feature of" means strict descendant in the seed tree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import MASK
from .corpus import ReviewSentence

LABEL_NON_ASPECT = 0
LABEL_FEATURE = 1
LABEL_PRODUCT = 2

LABEL_UNRELATED = 0
LABEL_SECOND_OF_FIRST = 1
LABEL_FIRST_OF_SECOND = 2


class UnknownTermError(KeyError):
    """A term was looked up that does not occur in the seed ontology."""


@dataclass
class SeedNode:
    terms: list[str]
    children: list["SeedNode"] = field(default_factory=list)


@dataclass
class SeedOntology:
    """Hand-written rooted term trees, one per product category."""

    products: dict[str, SeedNode]

    def __post_init__(self):
        self._depth: dict[tuple[str, str], int] = {}
        self._ancestors: dict[tuple[str, str], set[str]] = {}
        for product, root in self.products.items():
            self._index(product, root, [], 0)

    def _index(self, product: str, node: SeedNode, ancestor_terms: list[str], depth: int) -> None:
        for term in node.terms:
            key = (product, term)
            if key in self._depth:
                raise ValueError(f"term {term!r} appears twice in ontology for {product!r}")
            self._depth[key] = depth
            self._ancestors[key] = set(ancestor_terms)
        nxt = ancestor_terms + list(node.terms)
        for child in node.children:
            self._index(product, child, nxt, depth + 1)

    def max_depth(self, product: str) -> int:
        return max(d for (p, _), d in self._depth.items() if p == product)

    def terms(self, product: str) -> set[str]:
        return {t for (p, t) in self._depth if p == product}

    def root_terms(self, product: str) -> set[str]:
        return {t for (p, t), d in self._depth.items() if p == product and d == 0}

    def has_term(self, product: str, term: str) -> bool:
        return (product, term) in self._depth

    def is_descendant(self, product: str, a1: str, a2: str) -> bool:
        """True iff a1's node is a strict descendant of a2's node."""
        for term in (a1, a2):
            if not self.has_term(product, term):
                raise UnknownTermError(f"term {term!r} not in seed ontology for {product!r}")
        return a2 in self._ancestors[(product, a1)]

    @classmethod
    def load(cls, path: str | Path, max_depth: int = 5) -> "SeedOntology":
        """Load {product, root} JSON (a single object or a list of them)."""
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = obj if isinstance(obj, list) else [obj]
        products = {}
        for entry in entries:
            products[entry["product"]] = _parse_node(entry["root"])
        onto = cls(products=products)
        for product in products:
            depth = onto.max_depth(product)
            if depth > max_depth:
                raise ValueError(
                    f"ontology for {product!r} has depth {depth}, maximum allowed is {max_depth}"
                )
        return onto


def _parse_node(obj: dict) -> SeedNode:
    terms = [str(t).lower() for t in obj["terms"]]
    if not terms:
        raise ValueError("ontology node with no terms")
    return SeedNode(terms=terms, children=[_parse_node(c) for c in obj.get("children", [])])


def is_descendant(ontology: SeedOntology, a1: str, a2: str, product: str | None = None) -> bool:
    """True iff a1 is a strict descendant of a2 in the seed tree.

    When `product` is omitted, the single product containing both terms
    is used; ambiguity or absence raises UnknownTermError.
    """
    if product is not None:
        return ontology.is_descendant(product, a1, a2)
    hosts = [p for p in ontology.products if ontology.has_term(p, a1) and ontology.has_term(p, a2)]
    if not hosts:
        raise UnknownTermError(f"no product ontology contains both {a1!r} and {a2!r}")
    if len(hosts) > 1:
        raise UnknownTermError(f"terms {a1!r}, {a2!r} are ambiguous across products {hosts}")
    return ontology.is_descendant(hosts[0], a1, a2)


@dataclass(frozen=True)
class AspectExample:
    """Single-entity sentence with the entity masked.

    `label` is None for inference-time candidates that have no
    distant-supervision label.
    """

    sentence_id: str
    tokens: tuple[str, ...]
    mask_position: int
    entity: str
    label: int | None

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
            "mask_positions": [self.mask_position],
            "entities": [self.entity],
            "label": self.label,
            "task": "aspect",
        }


@dataclass(frozen=True)
class RelationExample:
    """Two-aspect sentence with both aspects masked, in textual order."""

    sentence_id: str
    tokens: tuple[str, ...]
    mask_positions: tuple[int, int]
    aspects: tuple[str, str]
    label: int | None

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
            "mask_positions": list(self.mask_positions),
            "entities": list(self.aspects),
            "label": self.label,
            "task": "relation",
        }


def example_from_json(obj: dict) -> "AspectExample | RelationExample":
    if obj["task"] == "aspect":
        return AspectExample(
            sentence_id=obj["sentence_id"],
            tokens=tuple(obj["tokens"]),
            mask_position=obj["mask_positions"][0],
            entity=obj["entities"][0],
            label=obj["label"],
        )
    return RelationExample(
        sentence_id=obj["sentence_id"],
        tokens=tuple(obj["tokens"]),
        mask_positions=tuple(obj["mask_positions"]),
        aspects=tuple(obj["entities"]),
        label=obj["label"],
    )


def aspect_label(ontology: SeedOntology, product: str, entity: str) -> int:
    """0 for an entity outside the tree, 1 for a feature, 2 for the product."""
    if not ontology.has_term(product, entity):
        return LABEL_NON_ASPECT
    if entity in ontology.root_terms(product):
        return LABEL_PRODUCT
    return LABEL_FEATURE


def generate_aspect_examples(
    sentences: Iterable[ReviewSentence],
    ontology: SeedOntology | None,
    product: str,
    frequent_entities: Sequence[str],
) -> Iterator[AspectExample]:
    """Emit one masked example per sentence with exactly one frequent entity.

    With an ontology the examples carry distant-supervision labels; with
    ontology=None they are unlabeled scoring candidates.
    """
    frequent = set(frequent_entities)
    for sent in sentences:
        positions = [i for i, tok in enumerate(sent.tokens) if tok in frequent]
        if len(positions) != 1:
            continue
        pos = positions[0]
        entity = sent.tokens[pos]
        tokens = list(sent.tokens)
        tokens[pos] = MASK
        yield AspectExample(
            sentence_id=sent.sentence_id,
            tokens=tuple(tokens),
            mask_position=pos,
            entity=entity,
            label=None if ontology is None else aspect_label(ontology, product, entity),
        )


def generate_relation_examples(
    sentences: Iterable[ReviewSentence],
    ontology: SeedOntology,
    product: str,
) -> Iterator[RelationExample]:
    """Emit one masked example per sentence with exactly two distinct seed terms."""
    seed_terms = ontology.terms(product)
    for sent in sentences:
        positions = [i for i, tok in enumerate(sent.tokens) if tok in seed_terms]
        if len(positions) != 2:
            continue
        a1, a2 = sent.tokens[positions[0]], sent.tokens[positions[1]]
        if a1 == a2:
            continue
        tokens = list(sent.tokens)
        tokens[positions[0]] = MASK
        tokens[positions[1]] = MASK
        if ontology.is_descendant(product, a2, a1):
            label = LABEL_SECOND_OF_FIRST
        elif ontology.is_descendant(product, a1, a2):
            label = LABEL_FIRST_OF_SECOND
        else:
            label = LABEL_UNRELATED
        yield RelationExample(
            sentence_id=sent.sentence_id,
            tokens=tuple(tokens),
            mask_positions=(positions[0], positions[1]),
            aspects=(a1, a2),
            label=label,
        )


def balance_classes(examples: Iterable, seed_rng: int) -> list:
    """Undersample so every label matches the minority-label count.

    Selection is uniform without replacement with the given seed and
    keeps the surviving examples in their original order. All three
    labels must be present.
    """
    pool = list(examples)
    by_label: dict[int, list[int]] = {}
    for idx, ex in enumerate(pool):
        by_label.setdefault(ex.label, []).append(idx)
    missing = {0, 1, 2} - set(by_label)
    if missing:
        raise ValueError(f"cannot balance: labels {sorted(missing)} absent from the data")
    target = min(len(v) for v in by_label.values())
    rng = random.Random(seed_rng)
    keep: set[int] = set()
    for label in sorted(by_label):
        idxs = by_label[label]
        keep.update(idxs if len(idxs) == target else rng.sample(idxs, target))
    return [pool[i] for i in sorted(keep)]


def write_examples(path: str | Path, examples: Iterable, meta: dict | None = None) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        if meta:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), sort_keys=True) + "\n")
            n += 1
    return n


def read_examples(path: str | Path) -> Iterator:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            yield example_from_json(obj)
