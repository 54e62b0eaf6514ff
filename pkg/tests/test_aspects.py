"""Vote aggregation into accepted aspects and the aspects artifact."""

import pytest

from meronomy import MASK
from meronomy.annotate import AspectExample
from meronomy.aspects import (
    AspectStats,
    aggregate_aspect_votes,
    aspect_terms,
    product_terms,
    read_aspects,
    write_aspects,
)
from meronomy.scoring import VoteTriple


def ex(sid, entity):
    return AspectExample(sid, (MASK, "is", "fine"), 0, entity, None)


def votes_for(*triples):
    return [VoteTriple(*t) for t in triples]


class TestAggregation:
    def test_means_votes_per_entity(self):
        examples = [ex("s0", "band"), ex("s1", "band"), ex("s2", "band")]
        votes = votes_for((0.0, 1.0, 0.0), (0.0, 0.5, 0.5), (0.2, 0.8, 0.0))
        (stats,) = aggregate_aspect_votes(examples, votes, min_votes=3)
        assert stats.n_votes == 3
        assert stats.mean_aspect == pytest.approx((1.0 + 1.0 + 0.8) / 3)
        assert stats.mean_product == pytest.approx(0.5 / 3)
        assert stats.is_aspect
        assert not stats.is_product

    def test_aspect_threshold_is_strict(self):
        # A single vote keeps the mean exact, so mean == threshold holds
        # without float drift and the strict comparison must reject it.
        votes = votes_for((0.35, 0.65, 0.0))
        (stats,) = aggregate_aspect_votes(
            [ex("s0", "band")], votes, aspect_threshold=0.65, min_votes=1
        )
        assert stats.mean_aspect == 0.65
        assert not stats.is_aspect

    def test_just_above_aspect_threshold_accepts(self):
        votes = votes_for((0.34, 0.66, 0.0))
        (stats,) = aggregate_aspect_votes(
            [ex("s0", "band")], votes, aspect_threshold=0.65, min_votes=1
        )
        assert stats.is_aspect

    def test_product_threshold_is_strict(self):
        votes = votes_for((0.0, 0.55, 0.45))
        (stats,) = aggregate_aspect_votes(
            [ex("s0", "watch")], votes, product_threshold=0.45, min_votes=1
        )
        assert stats.mean_product == 0.45
        assert stats.is_aspect
        assert not stats.is_product

    def test_product_requires_aspect(self):
        # Heavy product mass but the aspect mean sits below its bar.
        examples = [ex(f"s{i}", "thing") for i in range(3)]
        votes = votes_for(*[(0.4, 0.0, 0.6)] * 3)
        (stats,) = aggregate_aspect_votes(
            examples, votes, aspect_threshold=0.65, product_threshold=0.45, min_votes=3
        )
        assert stats.mean_product > 0.45
        assert not stats.is_aspect
        assert not stats.is_product

    def test_entities_below_min_votes_are_dropped(self):
        examples = [ex("s0", "band"), ex("s1", "band"), ex("s2", "dial")]
        votes = votes_for(*[(0.0, 1.0, 0.0)] * 3)
        stats = aggregate_aspect_votes(examples, votes, min_votes=2)
        assert [s.entity for s in stats] == ["band"]

    def test_sorted_by_votes_then_name(self):
        examples = [ex("s0", "dial"), ex("s1", "band"), ex("s2", "band"), ex("s3", "case")]
        votes = votes_for(*[(1.0, 0.0, 0.0)] * 4)
        stats = aggregate_aspect_votes(examples, votes, min_votes=1)
        assert [s.entity for s in stats] == ["band", "case", "dial"]

    def test_votes_as_mapping_keyed_by_sentence(self):
        examples = [ex("s0", "band")]
        table = {("s0", "aspect"): VoteTriple(0.0, 1.0, 0.0)}
        (stats,) = aggregate_aspect_votes(examples, table, min_votes=1)
        assert stats.mean_aspect == 1.0

    def test_missing_score_raises(self):
        with pytest.raises(KeyError, match="no aspect score"):
            aggregate_aspect_votes([ex("s0", "band")], {}, min_votes=1)

    def test_parallel_length_mismatch_raises(self):
        with pytest.raises(ValueError, match="vote triples"):
            aggregate_aspect_votes([ex("s0", "band")], [], min_votes=1)

    def test_min_votes_must_be_positive(self):
        with pytest.raises(ValueError, match="min_votes"):
            aggregate_aspect_votes([], [], min_votes=0)


class TestSelectors:
    def _stats(self):
        return [
            AspectStats("watch", 5, 0.9, 0.8, True, True),
            AspectStats("band", 4, 0.9, 0.1, True, False),
            AspectStats("daughter", 3, 0.1, 0.0, False, False),
        ]

    def test_aspect_terms(self):
        assert aspect_terms(self._stats()) == ["watch", "band"]

    def test_product_terms(self):
        assert product_terms(self._stats()) == ["watch"]


class TestAspectIO:
    def test_round_trip(self, tmp_path):
        stats = [
            AspectStats("watch", 5, 0.9, 0.8, True, True),
            AspectStats("band", 4, 0.75, 0.1, True, False),
        ]
        path = tmp_path / "aspects.jsonl"
        n = write_aspects(path, stats, meta={"config_hash": "x"})
        assert n == 2
        assert read_aspects(path) == stats
