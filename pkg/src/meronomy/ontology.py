"""Relation vote accumulation and ontology tree construction.

Sentences mentioning terms of exactly two distinct synsets are scored
for direction-of-feature, the probability mass is accumulated into a
vote matrix, normalized into a relation matrix, and each feature synset
picks the argmax of its row as its super synset. The tree is assembled
in descending score order with a loop guard that demotes a synset to
the root when its chosen parent is already its descendant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import MASK
from .annotate import RelationExample
from .corpus import ReviewSentence
from .scoring import VoteTriple
from .synsets import Synset


def synset_relation_candidates(
    sentences: Iterable[ReviewSentence],
    synsets: Sequence[Synset],
) -> Iterator[RelationExample]:
    """Masked candidates from sentences with exactly two synset-term tokens.

    Both tokens must belong to distinct synsets; sentences with fewer or
    more synset-term positions are skipped, as are two-mention sentences
    inside one synset. Candidates carry no label.
    """
    term_to_synset: dict[str, str] = {}
    for s in synsets:
        for t in s.terms:
            if t in term_to_synset:
                raise ValueError(f"term {t!r} appears in two synsets")
            term_to_synset[t] = s.id
    for sent in sentences:
        positions = [i for i, tok in enumerate(sent.tokens) if tok in term_to_synset]
        if len(positions) != 2:
            continue
        a1, a2 = sent.tokens[positions[0]], sent.tokens[positions[1]]
        if term_to_synset[a1] == term_to_synset[a2]:
            continue
        tokens = list(sent.tokens)
        tokens[positions[0]] = MASK
        tokens[positions[1]] = MASK
        yield RelationExample(
            sentence_id=sent.sentence_id,
            tokens=tuple(tokens),
            mask_positions=(positions[0], positions[1]),
            aspects=(a1, a2),
            label=None,
        )


@dataclass
class VoteMatrix:
    """Accumulated relation votes between synsets.

    v[i, j] holds the probability mass for "s_i is a feature of s_j",
    n[i, j] counts the sentences that voted on the pair (symmetric),
    and c[i] is the total corpus occurrence count of s_i's terms.
    """

    ids: tuple[str, ...]
    v: np.ndarray
    n: np.ndarray
    c: np.ndarray
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        size = len(self.ids)
        for name, m in (("v", self.v), ("n", self.n)):
            if m.shape != (size, size):
                raise ValueError(f"{name} has shape {m.shape}, expected {(size, size)}")
        if self.c.shape != (size,):
            raise ValueError(f"c has shape {self.c.shape}, expected {(size,)}")
        self.index = {sid: k for k, sid in enumerate(self.ids)}

    def votes(self, si: str, sj: str) -> float:
        return float(self.v[self.index[si], self.index[sj]])

    def pair_count(self, si: str, sj: str) -> float:
        return float(self.n[self.index[si], self.index[sj]])

    def occurrences(self, si: str) -> int:
        return int(self.c[self.index[si]])


def accumulate_votes(
    candidates: Iterable[RelationExample],
    synsets: Sequence[Synset],
    votes: Mapping[tuple[str, str], VoteTriple] | Iterable[VoteTriple],
    term_counts: Mapping[str, int] | None = None,
) -> VoteMatrix:
    """Fold per-sentence vote triples into the vote matrix.

    For a vote (p0, p1, p2) on aspects (a1, a2) in textual order with
    a1 in s_i and a2 in s_j: p1 backs "a2 is a feature of a1" so it goes
    to v[j, i]; p2 backs "a1 is a feature of a2" so it goes to v[i, j].
    Synset occurrence counts come from `term_counts` when given, else
    from the synsets' own c fields.
    """
    ids = tuple(s.id for s in synsets)
    term_to_synset = {t: s.id for s in synsets for t in s.terms}
    size = len(ids)
    v = np.zeros((size, size))
    n = np.zeros((size, size))
    index = {sid: k for k, sid in enumerate(ids)}

    candidates = list(candidates)
    if isinstance(votes, Mapping):
        triples = []
        for ex in candidates:
            key = (ex.sentence_id, "relation")
            if key not in votes:
                raise KeyError(f"no relation score for sentence {ex.sentence_id!r}")
            triples.append(votes[key])
    else:
        triples = list(votes)
        if len(triples) != len(candidates):
            raise ValueError(f"{len(candidates)} candidates but {len(triples)} vote triples")

    for ex, triple in zip(candidates, triples):
        a1, a2 = ex.aspects
        i, j = index[term_to_synset[a1]], index[term_to_synset[a2]]
        v[j, i] += triple.p1
        v[i, j] += triple.p2
        n[i, j] += 1.0
        n[j, i] += 1.0

    if term_counts is not None:
        c = np.array(
            [sum(int(term_counts.get(t, 0)) for t in s.terms) for s in synsets], dtype=np.int64
        )
    else:
        c = np.array([s.c for s in synsets], dtype=np.int64)
    return VoteMatrix(ids=ids, v=v, n=n, c=c)


@dataclass
class RelationMatrix:
    ids: tuple[str, ...]
    r: np.ndarray
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {sid: k for k, sid in enumerate(self.ids)}

    def score(self, si: str, sj: str) -> float:
        return float(self.r[self.index[si], self.index[sj]])

    def row(self, si: str) -> np.ndarray:
        return self.r[self.index[si]]


def relation_matrix(vm: VoteMatrix) -> RelationMatrix:
    """r[i, j] = v[i, j] / (c_i + c_j); equals mean vote times pair density."""
    zero = np.flatnonzero(vm.c <= 0)
    if len(zero):
        bad = [vm.ids[k] for k in zero]
        raise ValueError(f"synsets with zero corpus occurrences: {bad}")
    denom = vm.c[:, None] + vm.c[None, :]
    return RelationMatrix(ids=vm.ids, r=vm.v / denom)


def super_synset(rm: RelationMatrix, si: str, product_id: str) -> str:
    """The argmax of s_i's relation row, read as its likely parent.

    Ties prefer the product synset, then the smallest id by string
    order. A row with no positive entry falls back to the product
    synset, the only parent that is always safe to assume.
    """
    if si == product_id:
        raise ValueError("the product synset has no super synset")
    row = rm.row(si)
    i = rm.index[si]
    best_j, best_score = None, 0.0
    for j in range(len(rm.ids)):
        if j == i:
            continue
        score = float(row[j])
        if score <= 0.0:
            continue
        if best_j is None or score > best_score:
            best_j, best_score = j, score
        elif score == best_score:
            cand, cur = rm.ids[j], rm.ids[best_j]
            if cand == product_id or (cur != product_id and cand < cur):
                best_j = j
    if best_j is None:
        return product_id
    return rm.ids[best_j]


@dataclass
class OntologyTree:
    product: str
    synsets: list[Synset]
    parent: dict[str, str | None]
    prominence: dict[str, dict[str, int]]

    def __post_init__(self):
        self._by_id = {s.id: s for s in self.synsets}
        roots = [sid for sid, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError(f"tree must have exactly one root, found {roots}")
        self.root_id = roots[0]
        self._children: dict[str, list[str]] = {s.id: [] for s in self.synsets}
        for sid, pid in self.parent.items():
            if pid is not None:
                self._children[pid].append(sid)
        for sid in self._children:
            self._children[sid].sort()

    def synset(self, sid: str) -> Synset:
        return self._by_id[sid]

    def children(self, sid: str) -> list[str]:
        return self._children[sid]

    def is_descendant(self, sid: str, ancestor_id: str) -> bool:
        """True iff sid sits strictly below ancestor_id."""
        cur = self.parent[sid]
        while cur is not None:
            if cur == ancestor_id:
                return True
            cur = self.parent[cur]
        return False

    def edges(self) -> list[tuple[str, str]]:
        """(parent_id, child_id) pairs, sorted."""
        return sorted(
            (pid, sid) for sid, pid in self.parent.items() if pid is not None
        )

    def label(self, sid: str) -> str:
        """Display term for a synset: highest prevalence, ties by name."""
        prom = self.prominence[sid]
        return min(prom, key=lambda t: (-prom[t], t))

    def to_json(self) -> dict:
        nodes = []
        for s in sorted(self.synsets, key=lambda s: s.id):
            nodes.append(
                {
                    "id": s.id,
                    "terms": list(s.terms),
                    "parent_id": self.parent[s.id],
                    "prominence": self.prominence[s.id],
                    "label": self.label(s.id),
                    "is_product": s.is_product,
                }
            )
        return {"product": self.product, "nodes": nodes}


def build_tree(
    rm: RelationMatrix,
    synsets: Sequence[Synset],
    product: str,
    term_counts: Mapping[str, int] | None = None,
) -> OntologyTree:
    """Assemble the ontology tree from the relation matrix.

    Feature synsets are processed in descending order of their best
    relation score (ties by id). Each attaches under its super synset
    unless that synset is already its descendant in the partial tree,
    in which case it attaches to the root. A synset can only be demoted
    by a competitor whose score was at least as high, and the guard
    makes a cycle impossible.
    """
    products = [s for s in synsets if s.is_product]
    if len(products) != 1:
        raise ValueError(f"expected exactly one product synset, found {len(products)}")
    product_id = products[0].id

    choices = {}
    for s in synsets:
        if s.id == product_id:
            continue
        parent = super_synset(rm, s.id, product_id)
        choices[s.id] = (parent, rm.score(s.id, parent))
    order = sorted(choices, key=lambda sid: (-choices[sid][1], sid))

    parent_map: dict[str, str | None] = {product_id: None}
    children: dict[str, set[str]] = {s.id: set() for s in synsets}

    def has_descendant(root_id: str, target: str) -> bool:
        stack = [root_id]
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            stack.extend(children[cur])
        return False

    for sid in order:
        chosen, _score = choices[sid]
        if chosen == sid or has_descendant(sid, chosen):
            chosen = product_id
        parent_map[sid] = chosen
        children[chosen].add(sid)

    prominence = {}
    for s in synsets:
        if term_counts is not None:
            prominence[s.id] = {t: max(1, int(term_counts.get(t, 1))) for t in s.terms}
        else:
            prominence[s.id] = {t: 1 for t in s.terms}

    return OntologyTree(
        product=product, synsets=list(synsets), parent=parent_map, prominence=prominence
    )


def write_tree(path: str | Path, tree: OntologyTree, meta: dict | None = None) -> None:
    doc = {"version": 1, **tree.to_json()}
    if meta:
        doc["_meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_tree(path: str | Path) -> OntologyTree:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != 1:
        raise ValueError(f"{path}: unsupported ontology version {doc.get('version')!r}")
    synsets, parent, prominence = [], {}, {}
    for node in doc["nodes"]:
        terms = tuple(node["terms"])
        prom = {t: int(c) for t, c in node["prominence"].items()}
        synsets.append(
            Synset(
                id=node["id"],
                terms=terms,
                is_product=node["is_product"],
                c=sum(prom.values()),
            )
        )
        parent[node["id"]] = node["parent_id"]
        prominence[node["id"]] = prom
    return OntologyTree(
        product=doc["product"], synsets=synsets, parent=parent, prominence=prominence
    )
