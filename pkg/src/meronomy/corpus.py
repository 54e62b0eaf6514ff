"""Review corpus ingestion: JSONL loading, sentence splitting, tokenization."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

# Default JSONL schema. Values may name several source fields; they are
# joined with "-" to form the target value (useful for synthesized ids).
DEFAULT_FIELD_MAP = {"id": ("id",), "category": ("category",), "text": ("text",)}

# Adapter for the Amazon review dump schema: the review body lives in
# `reviewText` and there is no single id field, so one is synthesized.
AMAZON_FIELD_MAP = {
    "id": ("reviewerID", "asin", "unixReviewTime"),
    "category": ("category",),
    "text": ("reviewText",),
}

# Words after which a period does not end a sentence.
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "prof", "inc", "ltd", "co",
    "vs", "etc", "e.g", "i.e", "approx", "dept", "est", "min", "max",
    "no", "oz", "lb", "lbs", "ft", "in", "cm", "mm", "pt",
}

_SENTENCE_END = re.compile(r"[.!?]+")
# Word-ish tokens: numbers (with optional decimal part), words, and
# apostrophe clitics ("sweater's" -> "sweater", "'s").
_TOKEN = re.compile(r"\d+(?:\.\d+)?|[a-z]+|'[a-z]+")


@dataclass(frozen=True)
class RawReview:
    """One review document as read from the input file."""

    id: str
    category: str
    text: str


@dataclass(frozen=True)
class ReviewSentence:
    """One tokenized sentence; the atomic unit of evidence downstream."""

    sentence_id: str
    tokens: tuple[str, ...]
    raw: str
    category: str = ""

    def to_json(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "tokens": list(self.tokens),
            "raw": self.raw,
            "category": self.category,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReviewSentence":
        return cls(
            sentence_id=obj["sentence_id"],
            tokens=tuple(obj["tokens"]),
            raw=obj["raw"],
            category=obj.get("category", ""),
        )


@dataclass
class LoadStats:
    """Tally of what happened while reading a reviews file."""

    read: int = 0
    skipped: int = 0
    filtered: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, msg: str) -> None:
        self.skipped += 1
        self.warnings.append(msg)
        logger.warning(msg)


def load_reviews(
    path: str | Path,
    category_filter: str | None = None,
    stats: LoadStats | None = None,
    field_map: dict | None = None,
) -> Iterator[RawReview]:
    """Stream reviews from a JSONL file, one JSON object per line.

    Malformed lines (bad JSON, missing/empty text field) are skipped and
    counted in `stats`. File order is preserved. An unreadable file
    raises OSError.
    """
    fmap = field_map or DEFAULT_FIELD_MAP
    stats = stats if stats is not None else LoadStats()
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                stats.warn(f"{path.name}:{lineno}: not valid JSON, skipped")
                continue
            if not isinstance(obj, dict):
                stats.warn(f"{path.name}:{lineno}: not a JSON object, skipped")
                continue
            text = _pick(obj, fmap["text"])
            if not text or not str(text).strip():
                stats.warn(f"{path.name}:{lineno}: missing review text, skipped")
                continue
            rid = _pick(obj, fmap["id"]) or f"line{lineno}"
            category = str(_pick(obj, fmap["category"]) or "")
            if category_filter is not None and category != category_filter:
                stats.filtered += 1
                continue
            stats.read += 1
            yield RawReview(id=str(rid), category=category, text=str(text))


def _pick(obj: dict, fields: tuple[str, ...] | str) -> str | None:
    if isinstance(fields, str):
        fields = (fields,)
    vals = [str(obj[f]) for f in fields if f in obj and obj[f] is not None]
    if len(vals) != len(fields):
        return None
    return "-".join(vals)


def split_sentences(text: str) -> list[str]:
    """Split text on terminal punctuation, honoring common abbreviations.

    Punctuation only ends a sentence when followed by whitespace or the
    end of the text, so decimals ("38.5") and inner dots ("e.g.") never
    split. Text without terminal punctuation is one sentence.
    """
    sentences = []
    start = 0
    for m in _SENTENCE_END.finditer(text):
        if m.end() < len(text) and not text[m.end()].isspace():
            continue
        if m.group().startswith("."):
            last = re.search(r"[A-Za-z.]+$", text[start:m.start()])
            if last and last.group().lower().rstrip(".") in _ABBREVIATIONS:
                continue
        chunk = text[start:m.end()].strip()
        if chunk:
            sentences.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str) -> list[str]:
    """Lowercase and tokenize; punctuation-only runs produce no tokens."""
    return _TOKEN.findall(sentence.lower())


def split_and_tokenize(review: RawReview) -> list[ReviewSentence]:
    """Split a review into tokenized sentences.

    Sentences that tokenize to nothing (punctuation only) are dropped;
    degenerate text yields an empty list.
    """
    out = []
    ordinal = 0
    for raw in split_sentences(review.text):
        tokens = tokenize(raw)
        if not tokens:
            continue
        out.append(
            ReviewSentence(
                sentence_id=f"{review.id}:{ordinal}",
                tokens=tuple(tokens),
                raw=raw,
                category=review.category,
            )
        )
        ordinal += 1
    return out


def write_sentences(
    path: str | Path, sentences: Iterable[ReviewSentence], meta: dict | None = None
) -> int:
    """Write sentences as JSONL; returns the number written."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        if meta:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for sent in sentences:
            fh.write(json.dumps(sent.to_json(), sort_keys=True) + "\n")
            n += 1
    return n


def read_sentences(path: str | Path) -> Iterator[ReviewSentence]:
    """Read sentences from JSONL written by `write_sentences`."""
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            yield ReviewSentence.from_json(obj)
