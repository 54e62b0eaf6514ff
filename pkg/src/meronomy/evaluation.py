"""Evaluation metrics: precision, relative recall, F1, Fleiss's kappa,
and question/answer coverage of an ontology.

Human judgments of extracted relations arrive as CSV rows with three
rater verdicts each; a relation counts as correct under strict majority.
Relative recall compares each method against the union of all methods'
correct relations. The Q&A metrics measure how often an ontology's
terms, and its direct parent/child pairs, show up in product questions
and answers.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import tokenize
from .ontology import OntologyTree

logger = logging.getLogger(__name__)

N_RATERS = 3


@dataclass(frozen=True)
class RelationJudgment:
    parent: str
    child: str
    method: str
    labels: tuple[bool, ...]

    def __post_init__(self):
        if len(self.labels) != N_RATERS:
            raise ValueError(f"expected {N_RATERS} rater labels, got {len(self.labels)}")

    @property
    def majority(self) -> bool:
        return sum(self.labels) * 2 > len(self.labels)

    @property
    def relation(self) -> tuple[str, str]:
        return (self.parent, self.child)


@dataclass(frozen=True)
class QAInstance:
    question: str
    answer: str
    category: str = ""

    def __post_init__(self):
        if not self.question.strip() or not self.answer.strip():
            raise ValueError("question and answer must both be non-empty")


def precision(judgments: Sequence[RelationJudgment]) -> float:
    """Percentage of judged relations whose strict majority is true."""
    if not judgments:
        raise ValueError("precision of an empty judgment set is undefined")
    true = sum(1 for j in judgments if j.majority)
    return 100.0 * true / len(judgments)


def relative_recall(
    judgments_by_method: Mapping[str, Sequence[RelationJudgment]], method: str
) -> float | None:
    """|method's majority-true set| / |union of all methods' sets|, as %.

    The pool is the union of every method's majority-true relations, so
    adding a correct relation to any competitor can only lower (or keep)
    the score. Returns None when the pool is empty.
    """
    if method not in judgments_by_method:
        raise KeyError(f"method {method!r} has no judgments")
    true_sets = {
        m: {j.relation for j in js if j.majority} for m, js in judgments_by_method.items()
    }
    pool = set().union(*true_sets.values())
    if not pool:
        return None
    return 100.0 * len(true_sets[method]) / len(pool)


def f1(p: float, r: float) -> float:
    """Harmonic mean of two percentages; 0 when both are 0."""
    for name, x in (("precision", p), ("recall", r)):
        if not (0.0 <= x <= 100.0):
            raise ValueError(f"{name} {x!r} outside [0, 100]")
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def macro_f1(scores: Sequence[float]) -> float:
    """Unweighted mean of per-product F1 scores."""
    if not scores:
        raise ValueError("macro F1 of an empty list is undefined")
    return sum(scores) / len(scores)


def fleiss_kappa(label_matrix: Sequence[Sequence]) -> float | None:
    """Fleiss's kappa for a complete items-by-raters label matrix.

    Returns None when it is undefined: fewer than two items, or only one
    category ever used (expected agreement 1 makes the ratio 0/0).
    """
    rows = [tuple(row) for row in label_matrix]
    if len(rows) < 2:
        return None
    n_raters = len(rows[0])
    if n_raters < 2:
        raise ValueError("fleiss_kappa needs at least two raters")
    if any(len(row) != n_raters for row in rows):
        raise ValueError("every item must be rated by all raters")
    categories = sorted({lab for row in rows for lab in row}, key=repr)
    if len(categories) < 2:
        return None
    cat_index = {c: k for k, c in enumerate(categories)}

    counts = []
    for row in rows:
        c = [0] * len(categories)
        for lab in row:
            c[cat_index[lab]] += 1
        counts.append(c)

    n_items = len(rows)
    p_item = [
        (sum(x * x for x in c) - n_raters) / (n_raters * (n_raters - 1)) for c in counts
    ]
    p_bar = sum(p_item) / n_items
    p_cat = [sum(c[k] for c in counts) / (n_items * n_raters) for k in range(len(categories))]
    p_e = sum(p * p for p in p_cat)
    if p_e == 1.0:
        return None
    return (p_bar - p_e) / (1.0 - p_e)


def _phrase_tokens(term: str) -> tuple[str, ...]:
    # Joined phrases are stored with underscores; match them as a
    # contiguous token run.
    return tuple(term.lower().split("_"))


def _contains_term(tokens: Sequence[str], term: str) -> bool:
    parts = _phrase_tokens(term)
    if len(parts) == 1:
        return parts[0] in tokens
    for i in range(len(tokens) - len(parts) + 1):
        if tuple(tokens[i : i + len(parts)]) == parts:
            return True
    return False


def _mentions_any(tokens: Sequence[str], terms: Iterable[str]) -> bool:
    return any(_contains_term(tokens, t) for t in terms)


def qa_eval(tree: OntologyTree, instances: Sequence[QAInstance]) -> tuple[float, float]:
    """Coverage of Q&A text by the ontology, as two percentages.

    p_a counts instances where question plus answer mention at least one
    ontology term. p_r counts instances where the question mentions a
    term of some synset and the answer mentions a term of one of that
    synset's direct children. Matching is case-insensitive over token
    boundaries, so p_r can only fire where p_a does.
    """
    if not instances:
        raise ValueError("qa_eval needs at least one instance")
    all_terms = [t for s in tree.synsets for t in s.terms]
    edges = tree.edges()
    hits_a = 0
    hits_r = 0
    for inst in instances:
        q_tokens = tokenize(inst.question)
        a_tokens = tokenize(inst.answer)
        if _mentions_any(list(q_tokens) + list(a_tokens), all_terms):
            hits_a += 1
        else:
            continue
        found = False
        for parent_id, child_id in edges:
            if _mentions_any(q_tokens, tree.synset(parent_id).terms) and _mentions_any(
                a_tokens, tree.synset(child_id).terms
            ):
                found = True
                break
        if found:
            hits_r += 1
    n = len(instances)
    return (100.0 * hits_a / n, 100.0 * hits_r / n)


@dataclass(frozen=True)
class MethodScores:
    method: str
    n_relations: int
    n_true: int
    precision: float
    relative_recall: float | None
    f1: float | None


def evaluate_methods(judgments: Sequence[RelationJudgment]) -> list[MethodScores]:
    """Per-method precision, relative recall against the union pool, F1."""
    by_method: dict[str, list[RelationJudgment]] = {}
    for j in judgments:
        by_method.setdefault(j.method, []).append(j)
    if not by_method:
        raise ValueError("no judgments to evaluate")
    out = []
    for method in sorted(by_method):
        js = by_method[method]
        p = precision(js)
        r = relative_recall(by_method, method)
        out.append(
            MethodScores(
                method=method,
                n_relations=len(js),
                n_true=sum(1 for j in js if j.majority),
                precision=p,
                relative_recall=r,
                f1=None if r is None else f1(p, r),
            )
        )
    return out


def agreement_kappa(judgments: Sequence[RelationJudgment]) -> float | None:
    return fleiss_kappa([j.labels for j in judgments])


_TRUE_VALUES = {"true", "1", "yes", "t"}
_FALSE_VALUES = {"false", "0", "no", "f"}


def _parse_bool(raw: str, where: str) -> bool:
    val = raw.strip().lower()
    if val in _TRUE_VALUES:
        return True
    if val in _FALSE_VALUES:
        return False
    raise ValueError(f"{where}: cannot parse rater label {raw!r}")


def read_judgments(path: str | Path) -> list[RelationJudgment]:
    """Load judgment rows: relation_parent, relation_child, method, rater1..3."""
    out = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"relation_parent", "relation_child", "method"} | {
            f"rater{i}" for i in range(1, N_RATERS + 1)
        }
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            missing = sorted(required - set(reader.fieldnames or []))
            raise ValueError(f"{path}: judgment CSV missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            labels = tuple(
                _parse_bool(row[f"rater{i}"], f"{path}:{lineno}")
                for i in range(1, N_RATERS + 1)
            )
            out.append(
                RelationJudgment(
                    parent=row["relation_parent"].strip().lower(),
                    child=row["relation_child"].strip().lower(),
                    method=row["method"].strip(),
                    labels=labels,
                )
            )
    return out


def write_judgments(path: str | Path, judgments: Iterable[RelationJudgment]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["relation_parent", "relation_child", "method"]
            + [f"rater{i}" for i in range(1, N_RATERS + 1)]
        )
        for j in judgments:
            writer.writerow(
                [j.parent, j.child, j.method] + ["true" if b else "false" for b in j.labels]
            )


def read_qa_instances(path: str | Path) -> list[QAInstance]:
    """Load {question, answer, category} JSONL."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            try:
                out.append(
                    QAInstance(
                        question=obj["question"],
                        answer=obj["answer"],
                        category=obj.get("category", ""),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: invalid Q&A instance: {exc}") from exc
    return out
