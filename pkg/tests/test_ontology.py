"""Relation vote accumulation, the relation matrix, and tree assembly."""

import numpy as np
import pytest

from meronomy import MASK
from meronomy.annotate import RelationExample
from meronomy.corpus import ReviewSentence
from meronomy.ontology import (
    OntologyTree,
    RelationMatrix,
    VoteMatrix,
    accumulate_votes,
    build_tree,
    read_tree,
    relation_matrix,
    super_synset,
    synset_relation_candidates,
    write_tree,
)
from meronomy.scoring import VoteTriple
from meronomy.synsets import Synset


def synset(sid, *terms, product=False, c=10):
    return Synset(id=sid, terms=tuple(terms), is_product=product, c=c)


def candidate(sid, a1, a2):
    return RelationExample(
        sentence_id=sid,
        tokens=(MASK, "with", MASK),
        mask_positions=(0, 2),
        aspects=(a1, a2),
        label=None,
    )


THREE = [
    synset("s0", "watch", product=True, c=10),
    synset("s1", "band", c=10),
    synset("s2", "buckle", c=10),
]


class TestCandidates:
    def _sent(self, sid, *tokens):
        return ReviewSentence(sentence_id=sid, tokens=tokens, raw=" ".join(tokens))

    def test_exactly_two_distinct_synset_terms(self):
        sentences = [
            self._sent("a", "the", "watch", "has", "a", "band"),
            self._sent("b", "the", "watch", "is", "fine"),
            self._sent("c", "watch", "band", "buckle"),
            self._sent("d", "no", "terms", "at", "all"),
        ]
        out = list(synset_relation_candidates(sentences, THREE))
        assert [ex.sentence_id for ex in out] == ["a"]
        assert out[0].aspects == ("watch", "band")
        assert out[0].tokens == ("the", MASK, "has", "a", MASK)
        assert out[0].mask_positions == (1, 4)
        assert out[0].label is None

    def test_two_terms_of_one_synset_are_skipped(self):
        synsets = [
            synset("s0", "watch", product=True),
            synset("s1", "band", "strap"),
        ]
        sentences = [self._sent("a", "band", "or", "strap")]
        assert list(synset_relation_candidates(sentences, synsets)) == []

    def test_term_in_two_synsets_rejected(self):
        synsets = [
            synset("s0", "watch", product=True),
            synset("s1", "watch"),
        ]
        with pytest.raises(ValueError, match="two synsets"):
            list(synset_relation_candidates([], synsets))


class TestAccumulateVotes:
    def test_single_vote_routing(self):
        # p1 backs "second aspect under first", p2 the reverse.
        cands = [candidate("x", "watch", "band")]
        votes = {("x", "relation"): VoteTriple(0.2, 0.3, 0.5)}
        vm = accumulate_votes(cands, THREE, votes)
        assert vm.votes("s1", "s0") == pytest.approx(0.3)
        assert vm.votes("s0", "s1") == pytest.approx(0.5)
        assert vm.pair_count("s0", "s1") == 1
        assert vm.pair_count("s1", "s0") == 1
        assert vm.votes("s2", "s0") == 0.0

    def test_votes_accumulate_across_sentences(self):
        cands = [candidate("x", "watch", "band"), candidate("y", "band", "watch")]
        votes = {
            ("x", "relation"): VoteTriple(0.0, 1.0, 0.0),
            ("y", "relation"): VoteTriple(0.0, 0.0, 1.0),
        }
        vm = accumulate_votes(cands, THREE, votes)
        assert vm.votes("s1", "s0") == pytest.approx(2.0)
        assert vm.pair_count("s0", "s1") == 2

    def test_occurrence_counts_from_synsets(self):
        vm = accumulate_votes([], THREE, [])
        assert vm.occurrences("s0") == 10

    def test_occurrence_counts_from_term_counts(self):
        vm = accumulate_votes([], THREE, [], term_counts={"watch": 50, "band": 7})
        assert vm.occurrences("s0") == 50
        assert vm.occurrences("s1") == 7
        assert vm.occurrences("s2") == 0

    def test_missing_vote_raises(self):
        with pytest.raises(KeyError, match="no relation score"):
            accumulate_votes([candidate("x", "watch", "band")], THREE, {})

    def test_parallel_votes_length_checked(self):
        with pytest.raises(ValueError, match="vote triples"):
            accumulate_votes([candidate("x", "watch", "band")], THREE, [])

    def test_matrix_shape_validation(self):
        with pytest.raises(ValueError, match="shape"):
            VoteMatrix(
                ids=("s0", "s1"),
                v=np.zeros((3, 3)),
                n=np.zeros((2, 2)),
                c=np.ones(2),
            )


class TestRelationMatrix:
    def test_normalizes_by_summed_occurrences(self):
        cands = [candidate("x", "watch", "band"), candidate("y", "watch", "band")]
        votes = {
            ("x", "relation"): VoteTriple(0.0, 1.0, 0.0),
            ("y", "relation"): VoteTriple(0.0, 1.0, 0.0),
        }
        vm = accumulate_votes(cands, THREE, votes)
        rm = relation_matrix(vm)
        # v("s1","s0") = 2 over c pair 10 + 10
        assert rm.score("s1", "s0") == pytest.approx(2 / (10 + 10))
        assert rm.score("s0", "s1") == 0.0

    def test_zero_occurrence_synset_rejected(self):
        vm = accumulate_votes([], THREE, [], term_counts={"watch": 5})
        with pytest.raises(ValueError, match="zero corpus occurrences"):
            relation_matrix(vm)


class TestSuperSynset:
    def _rm(self, ids, rows):
        return RelationMatrix(ids=tuple(ids), r=np.array(rows, dtype=float))

    def test_argmax_of_row(self):
        rm = self._rm(
            ["s0", "s1", "s2"],
            [[0.0, 0.0, 0.0], [0.4, 0.0, 0.6], [0.1, 0.0, 0.0]],
        )
        assert super_synset(rm, "s1", "s0") == "s2"
        assert super_synset(rm, "s2", "s0") == "s0"

    def test_tie_prefers_product(self):
        rm = self._rm(
            ["s0", "s1", "s2"],
            [[0.0, 0.0, 0.0], [0.5, 0.0, 0.5], [0.0, 0.0, 0.0]],
        )
        assert super_synset(rm, "s1", "s0") == "s0"

    def test_tie_without_product_prefers_smaller_id(self):
        rm = self._rm(
            ["s0", "s1", "s2", "s3"],
            [
                [0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.5, 0.5],
                [0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ],
        )
        assert super_synset(rm, "s1", "s0") == "s2"

    def test_empty_row_falls_back_to_product(self):
        rm = self._rm(["s0", "s1"], [[0.0, 0.0], [0.0, 0.0]])
        assert super_synset(rm, "s1", "s0") == "s0"

    def test_self_score_is_ignored(self):
        rm = self._rm(["s0", "s1"], [[0.0, 0.0], [0.1, 0.9]])
        assert super_synset(rm, "s1", "s0") == "s0"

    def test_product_has_no_parent(self):
        rm = self._rm(["s0", "s1"], [[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="no super synset"):
            super_synset(rm, "s0", "s0")


class TestBuildTree:
    def _rm(self, ids, rows):
        return RelationMatrix(ids=tuple(ids), r=np.array(rows, dtype=float))

    def test_mutual_choice_demotes_lower_scored_synset(self):
        # s1 and s2 pick each other; s1 wins on score, so s2 is caught
        # by the loop guard and attaches to the root.
        synsets = [
            synset("s0", "watch", product=True),
            synset("s1", "band"),
            synset("s2", "strap"),
        ]
        rm = self._rm(
            ["s0", "s1", "s2"],
            [
                [0.0, 0.0, 0.0],
                [0.1, 0.0, 0.9],
                [0.1, 0.8, 0.0],
            ],
        )
        tree = build_tree(rm, synsets, product="watch")
        assert tree.parent == {"s0": None, "s1": "s2", "s2": "s0"}

    def test_star_attaches_everything_to_product(self):
        synsets = [synset("s0", "watch", product=True)] + [
            synset(f"s{i}", f"t{i}") for i in range(1, 6)
        ]
        rows = np.zeros((6, 6))
        rows[1:, 0] = 0.5
        rm = RelationMatrix(ids=tuple(s.id for s in synsets), r=rows)
        tree = build_tree(rm, synsets, product="watch")
        assert all(tree.parent[f"s{i}"] == "s0" for i in range(1, 6))

    def test_three_level_chain_recovered(self):
        synsets = [
            synset("s0", "watch", product=True),
            synset("s1", "band"),
            synset("s2", "buckle"),
        ]
        rm = self._rm(
            ["s0", "s1", "s2"],
            [
                [0.0, 0.0, 0.0],
                [0.6, 0.0, 0.0],
                [0.2, 0.5, 0.0],
            ],
        )
        tree = build_tree(rm, synsets, product="watch")
        assert tree.parent == {"s0": None, "s1": "s0", "s2": "s1"}
        assert tree.is_descendant("s2", "s0")
        assert not tree.is_descendant("s0", "s2")

    def test_requires_exactly_one_product(self):
        rm = self._rm(["s0", "s1"], [[0.0, 0.0], [0.5, 0.0]])
        no_product = [synset("s0", "a"), synset("s1", "b")]
        with pytest.raises(ValueError, match="exactly one product"):
            build_tree(rm, no_product, product="a")
        two_products = [
            synset("s0", "a", product=True),
            synset("s1", "b", product=True),
        ]
        with pytest.raises(ValueError, match="exactly one product"):
            build_tree(rm, two_products, product="a")

    def test_prominence_uses_term_counts_with_floor(self):
        synsets = [
            synset("s0", "watch", product=True),
            synset("s1", "band", "strap"),
        ]
        rm = self._rm(["s0", "s1"], [[0.0, 0.0], [0.5, 0.0]])
        tree = build_tree(
            rm, synsets, product="watch", term_counts={"watch": 9, "band": 4}
        )
        assert tree.prominence["s1"] == {"band": 4, "strap": 1}
        assert tree.label("s1") == "band"


class TestOntologyTree:
    def _tree(self):
        # c values match the prominence sums so the JSON round trip,
        # which reconstructs counts from prominence, is lossless.
        synsets = [
            synset("s0", "watch", product=True, c=9),
            synset("s1", "band", "strap", c=10),
            synset("s2", "buckle", c=2),
        ]
        return OntologyTree(
            product="watch",
            synsets=synsets,
            parent={"s0": None, "s1": "s0", "s2": "s1"},
            prominence={"s0": {"watch": 9}, "s1": {"band": 5, "strap": 5}, "s2": {"buckle": 2}},
        )

    def test_single_root_enforced(self):
        with pytest.raises(ValueError, match="exactly one root"):
            OntologyTree(
                product="watch",
                synsets=[synset("s0", "a"), synset("s1", "b")],
                parent={"s0": None, "s1": None},
                prominence={"s0": {"a": 1}, "s1": {"b": 1}},
            )

    def test_edges_are_sorted_parent_child_pairs(self):
        assert self._tree().edges() == [("s0", "s1"), ("s1", "s2")]

    def test_children_listing(self):
        tree = self._tree()
        assert tree.children("s0") == ["s1"]
        assert tree.children("s2") == []

    def test_label_breaks_prominence_ties_by_name(self):
        assert self._tree().label("s1") == "band"

    def test_round_trip(self, tmp_path):
        tree = self._tree()
        path = tmp_path / "ontology.json"
        write_tree(path, tree, meta={"config_hash": "x"})
        back = read_tree(path)
        assert back.parent == tree.parent
        assert back.product == tree.product
        assert back.synsets == tree.synsets
        assert back.prominence == tree.prominence

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "ontology.json"
        write_tree(path, self._tree())
        path.write_text(path.read_text().replace('"version": 1', '"version": 3'))
        with pytest.raises(ValueError, match="version"):
            read_tree(path)
