"""Synset induction: relative cosine similarity, synonym graph, clustering.

Aspect terms are grouped into synonym sets by thresholding a relative
cosine similarity score computed against the whole embedding vocabulary,
then clustering the resulting graph. Product aspects bypass clustering
and form the single product synset verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingTable

EDGE_THRESHOLD = 0.21
RCS_NEIGHBORS = 10
CLUSTER_MAX_DISTANCE = 3


def top_neighbors(table: EmbeddingTable, term: str, n: int = RCS_NEIGHBORS) -> list[str]:
    """The n most cosine-similar vocabulary terms, excluding the term itself.

    Ties at the boundary are broken by term name so the set is stable.
    """
    idx, order = _top_indices(table, table.index(term), n)
    del order
    return [table.terms[i] for i in idx]


def _top_indices(table: EmbeddingTable, i: int, n: int) -> tuple[list[int], np.ndarray]:
    if len(table) <= n:
        raise ValueError(f"vocabulary size {len(table)} must exceed n={n}")
    unit = table.unit_matrix()
    sims = unit @ unit[i]
    sims[i] = -np.inf
    nth = np.partition(sims, len(sims) - n)[len(sims) - n]
    above = np.flatnonzero(sims > nth)
    ties = np.flatnonzero(sims == nth)
    fill = sorted(ties, key=lambda k: table.terms[k])[: n - len(above)]
    chosen = sorted(list(above) + fill, key=lambda k: (-sims[k], table.terms[k]))
    return chosen, sims


def rcs(table: EmbeddingTable, w_i: str, w_j: str, n: int = RCS_NEIGHBORS) -> float:
    """cos(w_i, w_j) divided by the total similarity of w_i's top-n terms.

    The denominator sums cosine similarity over the n nearest neighbors
    of w_i (excluding w_i itself), so the scores of those neighbors sum
    to exactly 1.
    """
    i, j = table.index(w_i), table.index(w_j)
    if i == j:
        raise ValueError(f"rcs of {w_i!r} with itself is not defined")
    chosen, sims = _top_indices(table, i, n)
    denom = float(sims[chosen].sum())
    if denom == 0.0:
        raise ValueError(f"top-{n} similarity mass for {w_i!r} is zero")
    return float(sims[j]) / denom


@dataclass
class SynonymGraph:
    """Undirected graph over aspect terms; edge iff weight >= threshold."""

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]
    threshold: float = EDGE_THRESHOLD

    def __post_init__(self):
        node_set = set(self.nodes)
        for (a, b), w in self.edges.items():
            if a >= b:
                raise ValueError(f"edge key ({a!r}, {b!r}) must be sorted and distinct")
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a!r}, {b!r}) references a non-node")
            if w < self.threshold:
                raise ValueError(f"edge ({a!r}, {b!r}) weight {w} below threshold")
        self._adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for v in self._adj:
            self._adj[v].sort()

    def neighbors(self, v: str) -> list[str]:
        return self._adj[v]

    def weight(self, a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        return self.edges.get(key, 0.0)

    def weighted_degree(self, v: str) -> float:
        return sum(self.weight(v, u) for u in self._adj[v])

    def distances_from(self, source: str, cutoff: int) -> dict[str, int]:
        """BFS distances up to cutoff hops."""
        dist = {source: 0}
        frontier = [source]
        for depth in range(1, cutoff + 1):
            nxt = []
            for v in frontier:
                for u in self._adj[v]:
                    if u not in dist:
                        dist[u] = depth
                        nxt.append(u)
            frontier = nxt
        return dist


def graph_from_weights(
    nodes: Iterable[str],
    weights: Mapping[tuple[str, str], float],
    threshold: float = EDGE_THRESHOLD,
) -> SynonymGraph:
    """Build a graph from raw pair weights, dropping sub-threshold pairs."""
    edges = {}
    for (a, b), w in weights.items():
        if a == b:
            raise ValueError(f"self-pair weight for {a!r}")
        key = (a, b) if a < b else (b, a)
        if w >= threshold:
            edges[key] = w
    return SynonymGraph(nodes=tuple(sorted(set(nodes))), edges=edges, threshold=threshold)


def build_synonym_graph(
    table: EmbeddingTable,
    aspects: Sequence[str],
    tau_edge: float = EDGE_THRESHOLD,
    n: int = RCS_NEIGHBORS,
) -> SynonymGraph:
    """Connect aspect terms whose two-way rcs sum reaches the threshold."""
    aspects = list(aspects)
    missing = [a for a in aspects if a not in table]
    if missing:
        raise KeyError(f"aspect terms missing from embedding vocabulary: {missing}")
    denom: dict[str, float] = {}
    sim_row: dict[str, np.ndarray] = {}
    for a in aspects:
        chosen, sims = _top_indices(table, table.index(a), n)
        denom[a] = float(sims[chosen].sum())
        sim_row[a] = sims
    weights = {}
    for x in range(len(aspects)):
        for y in range(x + 1, len(aspects)):
            a, b = aspects[x], aspects[y]
            if denom[a] == 0.0 or denom[b] == 0.0:
                raise ValueError(f"zero top-{n} similarity mass for {a!r} or {b!r}")
            cos_ab = float(sim_row[a][table.index(b)])
            weights[(a, b)] = cos_ab / denom[a] + cos_ab / denom[b]
    return graph_from_weights(aspects, weights, tau_edge)


@dataclass(frozen=True)
class Synset:
    id: str
    terms: tuple[str, ...]
    is_product: bool
    c: int

    def __post_init__(self):
        if not self.terms:
            raise ValueError("synset with no terms")
        if self.c < 1:
            raise ValueError(f"synset {self.id}: occurrence count must be >= 1, got {self.c}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "terms": list(self.terms),
            "is_product": self.is_product,
            "c": self.c,
        }


def _absorbable(
    graph: SynonymGraph,
    seed: str,
    members: list[str],
    candidate: str,
    k: int,
    dist: dict[str, dict[str, int]],
) -> bool:
    # Pairwise cap first: every existing member must sit within k hops
    # of the candidate in the full graph.
    for m in members:
        if dist[candidate].get(m, k + 1) > k:
            return False
    # The connecting path from the seed may only pass through members.
    allowed = set(members) | {candidate}
    frontier = [seed]
    seen = {seed}
    for _depth in range(k):
        nxt = []
        for v in frontier:
            for u in graph.neighbors(v):
                if u == candidate:
                    return True
                if u in allowed and u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    return False


def cluster_synsets(
    graph: SynonymGraph,
    product_aspects: Iterable[str],
    k: int = CLUSTER_MAX_DISTANCE,
    term_counts: Mapping[str, int] | None = None,
) -> list[Synset]:
    """Partition feature aspects into synsets; product aspects form one synset.

    Nodes are ranked by weighted degree descending (ties by name). Each
    unassigned node in rank order seeds a cluster, then greedily absorbs
    unassigned nodes that are reachable from the seed within k hops
    through cluster members and that stay within k hops of every member.
    The second condition keeps any two synset terms within graph
    distance k. Deterministic and independent of input order.

    `term_counts` supplies corpus occurrence counts for the synset c
    field; terms missing from it count as 1.
    """
    product_terms = tuple(sorted(set(product_aspects)))
    if not product_terms:
        raise ValueError("no product aspects: cannot form the product synset")
    overlap = set(product_terms) & set(graph.nodes)
    if overlap:
        raise ValueError(f"product aspects also present in the feature graph: {sorted(overlap)}")

    rank = sorted(graph.nodes, key=lambda v: (-graph.weighted_degree(v), v))
    dist = {v: graph.distances_from(v, k) for v in graph.nodes}
    assigned: set[str] = set()
    groups: list[list[str]] = []
    for seed in rank:
        if seed in assigned:
            continue
        members = [seed]
        assigned.add(seed)
        while True:
            grabbed = None
            for cand in rank:
                if cand in assigned:
                    continue
                if _absorbable(graph, seed, members, cand, k, dist):
                    grabbed = cand
                    break
            if grabbed is None:
                break
            members.append(grabbed)
            assigned.add(grabbed)
        groups.append(sorted(members))

    def count(term: str) -> int:
        if term_counts is None:
            return 1
        return max(1, int(term_counts.get(term, 1)))

    synsets = [
        Synset(
            id="s0",
            terms=product_terms,
            is_product=True,
            c=sum(count(t) for t in product_terms),
        )
    ]
    for i, group in enumerate(sorted(groups), start=1):
        synsets.append(
            Synset(
                id=f"s{i}",
                terms=tuple(group),
                is_product=False,
                c=sum(count(t) for t in group),
            )
        )
    return synsets


def write_synsets(path: str | Path, synsets: Sequence[Synset], meta: dict | None = None) -> None:
    doc = {"version": 1, "synsets": [s.to_json() for s in synsets]}
    if meta:
        doc["_meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_synsets(path: str | Path) -> list[Synset]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != 1:
        raise ValueError(f"{path}: unsupported synsets version {doc.get('version')!r}")
    return [
        Synset(
            id=obj["id"],
            terms=tuple(obj["terms"]),
            is_product=obj["is_product"],
            c=obj["c"],
        )
        for obj in doc["synsets"]
    ]
