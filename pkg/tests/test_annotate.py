"""Distant supervision from a hand-written seed ontology.

The fixture ontology is a small clothing tree: sweater at the root,
material / colour / design below it, fabric below material. Six fixture
sentences pin down the label semantics for both tasks.
"""

import json

import pytest

from meronomy import MASK
from meronomy.annotate import (
    LABEL_FEATURE,
    LABEL_FIRST_OF_SECOND,
    LABEL_NON_ASPECT,
    LABEL_PRODUCT,
    LABEL_SECOND_OF_FIRST,
    LABEL_UNRELATED,
    AspectExample,
    RelationExample,
    SeedOntology,
    UnknownTermError,
    aspect_label,
    balance_classes,
    example_from_json,
    generate_aspect_examples,
    generate_relation_examples,
    is_descendant,
    read_examples,
    write_examples,
)
from meronomy.corpus import RawReview, split_and_tokenize

SWEATER_DOC = {
    "product": "sweater",
    "root": {
        "terms": ["sweater"],
        "children": [
            {
                "terms": ["material"],
                "children": [{"terms": ["fabric"], "children": []}],
            },
            {"terms": ["colour"], "children": []},
            {"terms": ["design"], "children": []},
        ],
    },
}


@pytest.fixture()
def sweater(tmp_path) -> SeedOntology:
    path = tmp_path / "seed.json"
    path.write_text(json.dumps(SWEATER_DOC))
    return SeedOntology.load(path)


def sentences_from(*texts):
    out = []
    for i, text in enumerate(texts):
        out.extend(split_and_tokenize(RawReview(id=f"r{i}", category="", text=text)))
    return out


class TestSeedOntology:
    def test_term_inventory(self, sweater):
        assert sweater.terms("sweater") == {
            "sweater", "material", "fabric", "colour", "design",
        }
        assert sweater.root_terms("sweater") == {"sweater"}
        assert sweater.max_depth("sweater") == 2

    def test_descendant_is_strict_and_transitive(self, sweater):
        assert sweater.is_descendant("sweater", "fabric", "material")
        assert sweater.is_descendant("sweater", "fabric", "sweater")
        assert not sweater.is_descendant("sweater", "sweater", "fabric")
        assert not sweater.is_descendant("sweater", "sweater", "sweater")
        assert not sweater.is_descendant("sweater", "design", "material")

    def test_unknown_term_raises(self, sweater):
        with pytest.raises(UnknownTermError):
            sweater.is_descendant("sweater", "zipper", "sweater")

    def test_module_level_descendant_resolves_product(self, sweater):
        assert is_descendant(sweater, "fabric", "sweater")
        with pytest.raises(UnknownTermError):
            is_descendant(sweater, "zipper", "sweater")

    def test_duplicate_term_rejected(self):
        doc = {
            "product": "p",
            "root": {"terms": ["p"], "children": [{"terms": ["p"], "children": []}]},
        }
        with pytest.raises(ValueError, match="twice"):
            SeedOntology(products={"p": _node(doc["root"])})

    def test_depth_limit_enforced_on_load(self, tmp_path):
        node = {"terms": ["t0"], "children": []}
        for depth in range(1, 8):
            node = {"terms": [f"t{depth}"], "children": [node]}
        path = tmp_path / "deep.json"
        path.write_text(json.dumps({"product": "p", "root": node}))
        with pytest.raises(ValueError, match="depth"):
            SeedOntology.load(path, max_depth=5)


def _node(obj):
    from meronomy.annotate import SeedNode

    return SeedNode(
        terms=list(obj["terms"]), children=[_node(c) for c in obj.get("children", [])]
    )


class TestAspectLabels:
    def test_entity_outside_tree(self, sweater):
        assert aspect_label(sweater, "sweater", "daughter") == LABEL_NON_ASPECT

    def test_feature_entity(self, sweater):
        assert aspect_label(sweater, "sweater", "material") == LABEL_FEATURE

    def test_product_entity(self, sweater):
        assert aspect_label(sweater, "sweater", "sweater") == LABEL_PRODUCT

    def test_fixture_sentences_get_expected_labels(self, sweater):
        sents = sentences_from(
            "My daughter loves it!",
            "The material is super soft.",
            "I love this sweater.",
        )
        frequent = ["daughter", "material", "sweater"]
        examples = list(generate_aspect_examples(sents, sweater, "sweater", frequent))
        got = {ex.entity: ex.label for ex in examples}
        assert got == {"daughter": 0, "material": 1, "sweater": 2}

    def test_mask_replaces_the_entity_token(self, sweater):
        sents = sentences_from("The material is super soft.")
        (ex,) = generate_aspect_examples(sents, sweater, "sweater", ["material"])
        assert ex.tokens[ex.mask_position] == MASK
        assert MASK not in (t for i, t in enumerate(ex.tokens) if i != ex.mask_position)
        assert ex.tokens == ("the", MASK, "is", "super", "soft")

    def test_requires_exactly_one_frequent_entity(self, sweater):
        sents = sentences_from(
            "The material suits the design.",  # two entities
            "It is soft.",  # zero entities
            "The material is soft.",  # one entity
        )
        frequent = ["material", "design"]
        examples = list(generate_aspect_examples(sents, sweater, "sweater", frequent))
        assert [ex.entity for ex in examples] == ["material"]

    def test_without_ontology_examples_are_unlabeled(self, sweater):
        sents = sentences_from("The material is soft.")
        (ex,) = generate_aspect_examples(sents, None, "sweater", ["material"])
        assert ex.label is None


class TestRelationLabels:
    def test_fixture_sentences_get_expected_labels(self, sweater):
        sents = sentences_from(
            "I like the design and the material.",
            "The sweater's fabric is so soft.",
            "The colour of the sweater is beautiful.",
        )
        examples = list(generate_relation_examples(sents, sweater, "sweater"))
        got = {ex.aspects: ex.label for ex in examples}
        assert got == {
            ("design", "material"): LABEL_UNRELATED,
            ("sweater", "fabric"): LABEL_SECOND_OF_FIRST,
            ("colour", "sweater"): LABEL_FIRST_OF_SECOND,
        }

    def test_both_positions_are_masked(self, sweater):
        sents = sentences_from("The sweater's fabric is so soft.")
        (ex,) = generate_relation_examples(sents, sweater, "sweater")
        assert ex.tokens == ("the", MASK, "'s", MASK, "is", "so", "soft")
        assert ex.mask_positions == (1, 3)

    def test_requires_exactly_two_distinct_seed_terms(self, sweater):
        sents = sentences_from(
            "The material is soft.",  # one term
            "The sweater material design is busy.",  # three terms
            "A sweater is a sweater.",  # same term twice
        )
        assert list(generate_relation_examples(sents, sweater, "sweater")) == []


class TestBalanceClasses:
    def _examples(self, labels):
        return [
            AspectExample(
                sentence_id=f"s{i}",
                tokens=(MASK, "x"),
                mask_position=0,
                entity="e",
                label=lab,
            )
            for i, lab in enumerate(labels)
        ]

    def test_downsamples_to_minority_count(self):
        pool = self._examples([0] * 10 + [1] * 4 + [2] * 7)
        out = balance_classes(pool, seed_rng=17)
        by_label = {lab: 0 for lab in (0, 1, 2)}
        for ex in out:
            by_label[ex.label] += 1
        assert by_label == {0: 4, 1: 4, 2: 4}

    def test_preserves_original_order(self):
        pool = self._examples([0, 1, 2, 0, 1, 2, 0])
        out = balance_classes(pool, seed_rng=17)
        ids = [int(ex.sentence_id[1:]) for ex in out]
        assert ids == sorted(ids)

    def test_deterministic_for_a_seed(self):
        pool = self._examples([0] * 20 + [1] * 5 + [2] * 9)
        a = balance_classes(pool, seed_rng=17)
        b = balance_classes(pool, seed_rng=17)
        assert a == b
        c = balance_classes(pool, seed_rng=18)
        assert [ex.sentence_id for ex in c] != [ex.sentence_id for ex in a]

    def test_missing_label_rejected(self):
        pool = self._examples([0, 0, 1])
        with pytest.raises(ValueError, match="labels \\[2\\] absent"):
            balance_classes(pool, seed_rng=17)


class TestExampleIO:
    def test_round_trip_both_kinds(self, tmp_path):
        aspect = AspectExample("s0", ("the", MASK), 1, "watch", 2)
        relation = RelationExample("s1", (MASK, "of", MASK), (0, 2), ("a", "b"), 1)
        path = tmp_path / "examples.jsonl"
        n = write_examples(path, [aspect, relation], meta={"config_hash": "x"})
        assert n == 2
        back = list(read_examples(path))
        assert back == [aspect, relation]

    def test_json_round_trip_preserves_types(self):
        ex = RelationExample("s1", (MASK, MASK), (0, 1), ("a", "b"), None)
        assert example_from_json(ex.to_json()) == ex
