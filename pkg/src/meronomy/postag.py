"""Part-of-speech tagging behind a small pluggable interface.

The default tagger is a self-contained lexicon + suffix-rule tagger so
the pipeline has no model dependency; an adapter reads pre-tagged
corpora produced by an external toolkit instead.
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Protocol, Sequence

from .corpus import ReviewSentence

logger = logging.getLogger(__name__)

NOUN_TAGS = {"NN", "NNS", "NNP", "NNPS"}

# Closed-class words and review-frequent verbs/adjectives/adverbs. Words
# not listed fall through to the suffix rules and then default to NN;
# unknown words in reviews are overwhelmingly nouns.
_LEXICON: dict[str, str] = {}


def _extend(tag: str, words: str) -> None:
    for w in words.split():
        _LEXICON[w] = tag


_extend("DT", "the a an this that these those each every some any no all both either neither another")
_extend("PRP", "i you he she it we they me him her us them myself yourself itself themselves mine yours hers ours theirs")
_extend("PRP$", "my your his its our their")
_extend("IN", "of in on at by for with from about into over under between through during against without within upon after before across behind beyond near since until toward towards despite per off around among")
_extend("CC", "and or but nor so yet plus")
_extend("TO", "to")
_extend("EX", "there")
_extend("WDT", "which what whatever")
_extend("WP", "who whom whoever")
_extend("WRB", "how when where why whenever wherever")
_extend("MD", "can could will would shall should may might must")
_extend("VB", "be do have go get make take come give keep let put seem help show hear play run move like love hate want need know think say see use find tell ask work feel try leave call buy break wear fit hold open close turn start stop send expect return charge wash look sound smell recommend suggest order arrive happen cost last pay install replace connect adjust wind set")
_extend("VBP", "am are do have")
_extend("VBZ", "is has does was")
_extend("VBD", "was were did had bought got made took came gave went said saw felt found told thought kept left held wore broke paid sent")
_extend("RB", "not n't very really quite too also just only even still never always often sometimes usually again soon already perhaps maybe almost enough rather pretty fairly super extremely easily well far away back now then here everywhere nicely highly definitely absolutely")
_extend("JJ", "good great nice bad poor big small large little new old long short high low easy hard soft warm cold hot cool light heavy dark bright cheap expensive beautiful lovely comfortable comfy durable sturdy flimsy solid smooth rough thick thin wide narrow deep shallow quick slow fast loud quiet clear sharp dull vivid shiny matte happy sad perfect terrible awful amazing awesome wonderful fantastic excellent decent okay fine strong weak sweet fresh stale clean dirty wrong right true false simple fancy elegant stylish modern classic genuine fake waterproof wireless digital analog sleek crisp accurate reliable defective broken loose tight snug gorgeous stunning ordinary")
_extend("JJ", "red blue green black white pink purple yellow grey gray brown golden cute tiny huge ugly handy slim bulky")
_extend("CD", "one two three four five six seven eight nine ten zero hundred thousand million first second third")
_extend("UH", "yes yeah yep nope oh wow hey please thanks")
_extend("POS", "'s")

_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("'s", "POS"),
    ("ly", "RB"),
    ("ing", "VBG"),
    ("ed", "VBD"),
    ("est", "JJS"),
    ("ful", "JJ"),
    ("ous", "JJ"),
    ("ive", "JJ"),
    ("able", "JJ"),
    ("ible", "JJ"),
    ("ish", "JJ"),
    ("less", "JJ"),
)

_NUMBER = re.compile(r"^\d+(?:\.\d+)?$")


class Tagger(Protocol):
    """Assigns one PTB-style tag per token of a sentence."""

    def tag_sentence(self, sentence: ReviewSentence) -> list[str]: ...


class LexiconTagger:
    """Dependency-free tagger: lexicon lookup, suffix rules, default NN.

    Underscore-joined phrases are tagged by their head (last) word.
    """

    def tag_sentence(self, sentence: ReviewSentence) -> list[str]:
        return [self.tag_token(tok) for tok in sentence.tokens]

    def tag_token(self, token: str) -> str:
        head = token.rsplit("_", 1)[-1]
        if _NUMBER.match(head):
            return "CD"
        tag = _LEXICON.get(head)
        if tag is not None:
            return tag
        for suffix, stag in _SUFFIX_RULES:
            if head.endswith(suffix) and len(head) > len(suffix) + 2:
                return stag
        return "NN"


class PretaggedCorpusTagger:
    """Adapter over a pre-tagged corpus: JSONL {sentence_id, tags: ["tok/TAG", ...]}.

    Sentences absent from the file raise KeyError; a token-count
    mismatch with the live sentence raises ValueError.
    """

    def __init__(self, path: str | Path):
        self._tags: dict[str, list[str]] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                tags = [t.rsplit("/", 1)[1] for t in obj["tags"]]
                self._tags[obj["sentence_id"]] = tags

    def tag_sentence(self, sentence: ReviewSentence) -> list[str]:
        tags = self._tags[sentence.sentence_id]
        if len(tags) != len(sentence.tokens):
            raise ValueError(
                f"pre-tagged length mismatch for {sentence.sentence_id}: "
                f"{len(tags)} tags vs {len(sentence.tokens)} tokens"
            )
        return tags


def tag_nouns(sentence: ReviewSentence, tagger: Tagger) -> set[str]:
    """Tokens of the sentence judged to be nouns.

    A tagger failure yields an empty set with a warning rather than
    aborting the corpus pass.
    """
    try:
        tags = tagger.tag_sentence(sentence)
    except Exception as exc:
        logger.warning("tagger failed on %s: %s", sentence.sentence_id, exc)
        return set()
    return {tok for tok, tag in zip(sentence.tokens, tags) if tag in NOUN_TAGS}
