"""Synthetic review generator with a planted ontology.

Builds a corpus of templated review sentences over a known three-level
part-of tree so the whole pipeline can be validated end to end: the
planted tree is the expected output, and a truth file lets the oracle
scorer answer aspect and relation queries perfectly.

Template discipline matters more than realism here. Every filler word
is chosen so the lexicon tagger calls it something other than a noun;
otherwise fillers would leak into the frequent-entity list and starve
the single-entity sentences the aspect stage feeds on. Synonyms inside
one synset draw from identical templates so their embeddings converge,
each synset gets its own signature adjectives so different synsets
stay apart, and co-mention sentences keep the two terms more than a
window apart so relation evidence does not bleed into the embeddings.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import ReviewSentence, tokenize
from .phrases import apply_phrases, learn_phrases
from .postag import NOUN_TAGS, LexiconTagger

CATEGORY = "watch"

SENTENCES_PER_SYNSET = 300
SENTENCES_PER_EDGE = 50
SENTENCES_PER_GRAND = 10
SENTENCES_PER_UNRELATED = 8
NOISE_SENTENCES = 450


@dataclass(frozen=True)
class PlantedSynset:
    key: str
    terms: tuple[str, ...]
    parent: str | None
    adjectives: tuple[str, ...]


# Terms containing a space ("battery life") are emitted as two words and
# must be re-joined by the collocation pass. Adjective pools are unique
# per synset and every word is tagged JJ by lexicon or suffix.
PLANTED: tuple[PlantedSynset, ...] = (
    PlantedSynset("product", ("watch", "timepiece"), None,
                  ("stylish", "fashionable", "remarkable", "marvelous")),
    PlantedSynset("band", ("band", "strap"), "product",
                  ("stretchable", "adjustable", "comfortable", "flexible")),
    PlantedSynset("display", ("display", "screen"), "product",
                  ("readable", "colorful", "luminous", "noticeable")),
    PlantedSynset("power", ("battery", "battery life"), "product",
                  ("powerful", "reliable", "effective", "tireless")),
    PlantedSynset("movement", ("movement",), "product",
                  ("seamless", "graceful", "responsive", "continuous")),
    PlantedSynset("case", ("case",), "product",
                  ("massive", "spacious", "flawless", "protective")),
    PlantedSynset("buckle", ("buckle",), "band",
                  ("breakable", "movable", "dependable", "serviceable")),
    PlantedSynset("leather", ("leather",), "band",
                  ("luxurious", "gorgeous", "tasteful", "delightful")),
    PlantedSynset("dial", ("dial",), "display",
                  ("attractive", "expressive", "decorative", "distinctive")),
    PlantedSynset("backlight", ("backlight",), "display",
                  ("helpful", "useful", "adaptive", "dimmable")),
    PlantedSynset("charger", ("charger",), "power",
                  ("portable", "detachable", "dreadful", "hazardous")),
    PlantedSynset("gears", ("gears",), "movement",
                  ("meticulous", "tremendous", "aggressive", "defective")),
    PlantedSynset("bezel", ("bezel",), "case",
                  ("spotless", "enormous", "impressive", "priceless")),
)

# Seed-term pairs in different branches, co-mentioned so the relation
# training set contains the "unrelated" label.
UNRELATED_PAIRS = (("buckle", "dial"), ("leather", "backlight"), ("strap", "screen"))

# Slot pools. Repetition is the enemy here: the collocation score grows
# with corpus size, so a word pair that is adjacent in most of its
# occurrences gets joined no matter how the templates read. Every
# adjacency below is therefore either randomized over a pool (so pair
# counts stay small) or sits on words frequent enough to keep the
# count product above the join bar.
_ADVERBS = ("really", "quite", "fairly", "extremely", "very", "truly", "pretty", "super")
_DETERMINERS = ("the", "my", "this", "that", "its", "our", "their")
_COPULAS = ("is", "was")
_SUBJECTS = ("it", "this", "that")
_PLAIN_ADJS = ("good", "great", "nice", "fine", "decent", "okay")


def term_token(term: str) -> str:
    """Corpus-token form of a planted term: phrases join with underscores."""
    return term.replace(" ", "_")


def _by_key() -> dict[str, PlantedSynset]:
    return {s.key: s for s in PLANTED}


def planted_parent_keys() -> dict[str, str | None]:
    return {s.key: s.parent for s in PLANTED}


def planted_descendant_pairs() -> set[tuple[str, str]]:
    """All (descendant term, ancestor term) pairs, in token form."""
    nodes = _by_key()
    pairs = set()
    for s in PLANTED:
        anc = s.parent
        while anc is not None:
            for d in s.terms:
                for a in nodes[anc].terms:
                    pairs.add((term_token(d), term_token(a)))
            anc = nodes[anc].parent
    return pairs


def planted_aspect_labels() -> dict[str, str]:
    labels = {}
    for s in PLANTED:
        kind = "product" if s.parent is None else "feature"
        for t in s.terms:
            labels[term_token(t)] = kind
    return labels


def expected_canonical() -> dict[frozenset, frozenset | None]:
    """The planted tree as {synset terms -> parent synset terms}."""
    nodes = _by_key()
    out: dict[frozenset, frozenset | None] = {}
    for s in PLANTED:
        terms = frozenset(term_token(t) for t in s.terms)
        if s.parent is None:
            out[terms] = None
        else:
            out[terms] = frozenset(term_token(t) for t in nodes[s.parent].terms)
    return out


def canonical_from_tree_json(doc: dict) -> dict[frozenset, frozenset | None]:
    """The same canonical form, computed from an ontology JSON document."""
    by_id = {node["id"]: frozenset(node["terms"]) for node in doc["nodes"]}
    out = {}
    for node in doc["nodes"]:
        pid = node["parent_id"]
        out[by_id[node["id"]]] = None if pid is None else by_id[pid]
    return out


def _single_entity(rng: random.Random, term: str, adjs: tuple[str, ...]) -> str:
    # Adjectives stay in predicate position: an adjective directly
    # before the term would recur often enough to be joined as a phrase.
    a = rng.choice(adjs)
    a2 = rng.choice([x for x in adjs if x != a])
    rb = rng.choice(_ADVERBS)
    d = rng.choice(_DETERMINERS)
    cop = rng.choice(_COPULAS)
    shapes = (
        f"{d} {term} {cop} {rb} {a}",
        f"{d} {term} {cop} {a} and {a2}",
        f"{d} {term} {cop} not {a}",
    )
    return rng.choice(shapes)


def _co_mention(
    rng: random.Random, child: str, parent: str, child_adjs, parent_adjs
) -> str:
    """Child and parent in one sentence, kept over four tokens apart.

    Textual order is randomized; the oracle labels from the truth
    pairs, not from position, so both orders feed the vote matrix.
    """
    if rng.random() < 0.5:
        x, xp, y, yp = child, child_adjs, parent, parent_adjs
    else:
        x, xp, y, yp = parent, parent_adjs, child, child_adjs
    xa = rng.choice(xp)
    xa2 = rng.choice([w for w in xp if w != xa])
    ya = rng.choice(yp)
    rb = rng.choice(_ADVERBS)
    d = rng.choice(_DETERMINERS)
    d2 = rng.choice(_DETERMINERS)
    cop = rng.choice(_COPULAS)
    cop2 = rng.choice(_COPULAS)
    shapes = (
        f"{d} {x} {cop} {xa} and {d2} {y} {cop2} {ya}",
        f"{d} {x} {cop} not {xa} but {d2} {y} {cop2} {rb} {ya}",
        f"{d} {x} {cop} {xa} and {xa2} and {d2} {y} {cop2} {ya}",
    )
    return shapes[rng.randrange(len(shapes))]


def _noise_sentence(rng: random.Random) -> str:
    # Entity-free filler mirroring the single-entity shapes, so every
    # noise word already carries corpus-wide frequency mass.
    subj = rng.choice(_SUBJECTS)
    cop = rng.choice(_COPULAS)
    rb = rng.choice(_ADVERBS)
    g = rng.choice(_PLAIN_ADJS)
    g2 = rng.choice([w for w in _PLAIN_ADJS if w != g])
    shapes = (
        f"{subj} {cop} {rb} {g}",
        f"{subj} {cop} not {g}",
        f"{subj} {cop} {g} and {g2}",
    )
    return rng.choice(shapes)


def _check_tags(sentences: list[str]) -> None:
    """Fail fast if any filler word would be tagged as a noun.

    Template drift that introduces a stray noun silently corrupts the
    frequent-entity list, so this guard runs on every generated corpus.
    """
    allowed = {w for s in PLANTED for t in s.terms for w in t.split(" ")}
    tagger = LexiconTagger()
    seen = set()
    for text in sentences:
        tokens = tuple(tokenize(text))
        if tokens in seen:
            continue
        seen.add(tokens)
        for tok in tokens:
            if tagger.tag_token(tok) in NOUN_TAGS and tok not in allowed:
                raise AssertionError(f"template word {tok!r} tagged as a noun in {text!r}")


def _check_phrases(sentences: list[str]) -> None:
    """Fail fast unless the collocation pass joins exactly battery_life.

    Any other join means a template pair recurs often enough to be
    mistaken for a phrase, which eats bare-term counts and floods the
    frequent-entity list with underscore junk.
    """
    corpus = [
        ReviewSentence(sentence_id=str(i), tokens=tuple(tokenize(text)), raw=text)
        for i, text in enumerate(sentences)
    ]
    model = learn_phrases(corpus, passes=2, min_count=5, threshold=10.0)
    joined = set()
    for sent in corpus:
        for tok in apply_phrases(model, sent).tokens:
            if "_" in tok:
                joined.add(tok)
    if joined != {"battery_life"}:
        raise AssertionError(f"unexpected collocation joins: {sorted(joined)}")


def generate_sentences(seed: int = 13) -> list[str]:
    rng = random.Random(seed)
    nodes = _by_key()
    sentences: list[str] = []

    for s in PLANTED:
        for _ in range(SENTENCES_PER_SYNSET):
            sentences.append(_single_entity(rng, rng.choice(s.terms), s.adjectives))

    root = nodes["product"]
    for s in PLANTED:
        if s.parent is None:
            continue
        parent = nodes[s.parent]
        for _ in range(SENTENCES_PER_EDGE):
            sentences.append(
                _co_mention(
                    rng,
                    rng.choice(s.terms),
                    rng.choice(parent.terms),
                    s.adjectives,
                    parent.adjectives,
                )
            )
        if parent.parent is not None:
            # A little grandparent evidence so the parent argmax has
            # real competition instead of a single nonzero column.
            for _ in range(SENTENCES_PER_GRAND):
                sentences.append(
                    _co_mention(
                        rng,
                        rng.choice(s.terms),
                        rng.choice(root.terms),
                        s.adjectives,
                        root.adjectives,
                    )
                )

    term_home = {t: s for s in PLANTED for t in s.terms}
    for a, b in UNRELATED_PAIRS:
        for _ in range(SENTENCES_PER_UNRELATED):
            sentences.append(
                _co_mention(
                    rng, a, b, term_home[a].adjectives, term_home[b].adjectives
                )
            )

    for _ in range(NOISE_SENTENCES):
        sentences.append(_noise_sentence(rng))

    rng.shuffle(sentences)
    _check_tags(sentences)
    _check_phrases(sentences)
    return sentences


def seed_ontology_doc() -> dict:
    """A hand-sized subset of the planted tree for distant supervision."""
    return {
        "product": CATEGORY,
        "root": {
            "terms": ["watch", "timepiece"],
            "children": [
                {
                    "terms": ["band", "strap"],
                    "children": [{"terms": ["buckle"], "children": []}],
                },
                {
                    "terms": ["display", "screen"],
                    "children": [{"terms": ["dial"], "children": []}],
                },
            ],
        },
    }


def truth_doc() -> dict:
    return {
        "product": CATEGORY,
        "aspect_labels": planted_aspect_labels(),
        "descendant_pairs": sorted(list(p) for p in planted_descendant_pairs()),
        "synsets": [
            {
                "terms": sorted(term_token(t) for t in s.terms),
                "parent_terms": (
                    None
                    if s.parent is None
                    else sorted(term_token(t) for t in _by_key()[s.parent].terms)
                ),
            }
            for s in PLANTED
        ],
    }


@dataclass(frozen=True)
class GeneratedCorpus:
    reviews_path: Path
    seed_ontology_path: Path
    truth_path: Path
    n_reviews: int
    n_sentences: int


def generate_corpus(out_dir: str | Path, seed: int = 13) -> GeneratedCorpus:
    """Write reviews.jsonl, seed_ontology.json, and truth.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sentences = generate_sentences(seed)

    rng = random.Random(seed + 1)
    reviews_path = out / "reviews.jsonl"
    n_reviews = 0
    with reviews_path.open("w", encoding="utf-8") as fh:
        i = 0
        while i < len(sentences):
            take = min(rng.randint(1, 3), len(sentences) - i)
            chunk = sentences[i : i + take]
            i += take
            text = " ".join(s[0].upper() + s[1:] + "." for s in chunk)
            rec = {"id": f"r{n_reviews:06d}", "category": CATEGORY, "text": text}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            n_reviews += 1

    seed_path = out / "seed_ontology.json"
    seed_path.write_text(
        json.dumps(seed_ontology_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    truth_path = out / "truth.json"
    truth_path.write_text(
        json.dumps(truth_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return GeneratedCorpus(
        reviews_path=reviews_path,
        seed_ontology_path=seed_path,
        truth_path=truth_path,
        n_reviews=n_reviews,
        n_sentences=len(sentences),
    )
