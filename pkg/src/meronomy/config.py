"""Pipeline configuration: one YAML file, validated up front.

The config hash covers only parameters that affect computed results
(thresholds, seeds, backend choice), never filesystem paths, so moving
an output directory does not invalidate artifacts. Every stage stamps
the hash into its artifacts and refuses inputs stamped with a different
hash unless forced.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

OUT_DIR_ENV = "MERONOMY_OUT_DIR"

BACKENDS = ("baseline", "oracle", "external")


class ConfigError(ValueError):
    """Invalid or inconsistent pipeline configuration."""


@dataclass
class PipelineConfig:
    # paths (never hashed)
    reviews: Path
    out_dir: Path
    seed_ontology: Path | None = None
    truth: Path | None = None
    aspect_scores: Path | None = None
    relation_scores: Path | None = None
    pretagged: Path | None = None

    # semantic parameters
    category: str = ""
    product: str = ""
    phrase_passes: int = 2
    phrase_min_count: int = 5
    phrase_threshold: float = 10.0
    top_n_entities: int = 200
    aspect_threshold: float = 0.65
    product_threshold: float = 0.45
    min_votes: int = 3
    embedding_dim: int = 100
    window: int = 4
    epochs: int = 5
    negatives: int = 5
    embedding_min_count: int = 5
    learning_rate: float = 0.025
    edge_threshold: float = 0.21
    rcs_n: int = 10
    max_distance: int = 3
    scorer_backend: str = "baseline"
    seed: int = 13
    balance_seed: int = 17
    force: bool = field(default=False, compare=False)

    def validate(self) -> None:
        checks = [
            (0.0 < self.aspect_threshold < 1.0, "aspects.aspect_threshold must be in (0, 1)"),
            (0.0 < self.product_threshold < 1.0, "aspects.product_threshold must be in (0, 1)"),
            (self.min_votes >= 1, "aspects.min_votes must be >= 1"),
            (self.phrase_passes in (1, 2), "phrases.passes must be 1 or 2"),
            (self.phrase_min_count >= 1, "phrases.min_count must be >= 1"),
            (self.phrase_threshold > 0.0, "phrases.threshold must be positive"),
            (self.top_n_entities >= 1, "entities.top_n must be >= 1"),
            (self.embedding_dim >= 8, "embeddings.dim must be >= 8"),
            (self.window >= 1, "embeddings.window must be >= 1"),
            (self.epochs >= 1, "embeddings.epochs must be >= 1"),
            (self.negatives >= 1, "embeddings.negatives must be >= 1"),
            (self.embedding_min_count >= 1, "embeddings.min_count must be >= 1"),
            (self.learning_rate > 0.0, "embeddings.lr must be positive"),
            (0.0 < self.edge_threshold <= 2.0, "synsets.edge_threshold must be in (0, 2]"),
            (self.rcs_n >= 1, "synsets.rcs_n must be >= 1"),
            (self.max_distance >= 1, "synsets.max_distance must be >= 1"),
            (self.scorer_backend in BACKENDS, f"scorer.backend must be one of {BACKENDS}"),
        ]
        problems = [msg for ok, msg in checks if not ok]
        if self.scorer_backend == "oracle" and self.truth is None:
            problems.append("scorer.backend 'oracle' requires paths.truth")
        if self.scorer_backend == "external" and (
            self.aspect_scores is None or self.relation_scores is None
        ):
            problems.append(
                "scorer.backend 'external' requires paths.aspect_scores and paths.relation_scores"
            )
        if problems:
            raise ConfigError("; ".join(problems))

    def semantic_params(self) -> dict:
        return {
            "category": self.category,
            "product": self.product,
            "phrase_passes": self.phrase_passes,
            "phrase_min_count": self.phrase_min_count,
            "phrase_threshold": self.phrase_threshold,
            "top_n_entities": self.top_n_entities,
            "aspect_threshold": self.aspect_threshold,
            "product_threshold": self.product_threshold,
            "min_votes": self.min_votes,
            "embedding_dim": self.embedding_dim,
            "window": self.window,
            "epochs": self.epochs,
            "negatives": self.negatives,
            "embedding_min_count": self.embedding_min_count,
            "learning_rate": self.learning_rate,
            "edge_threshold": self.edge_threshold,
            "rcs_n": self.rcs_n,
            "max_distance": self.max_distance,
            "scorer_backend": self.scorer_backend,
            "seed": self.seed,
            "balance_seed": self.balance_seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_params(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def stamp(self, stage: str) -> dict:
        return {"config_hash": self.config_hash(), "stage": stage}


def _opt_path(section: dict, key: str, base: Path) -> Path | None:
    raw = section.get(key)
    if raw in (None, ""):
        return None
    p = Path(str(raw))
    return p if p.is_absolute() else base / p


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a YAML config file.

    Relative paths resolve against the config file's directory. The
    MERONOMY_OUT_DIR environment variable overrides paths.out_dir.
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    base = path.parent
    paths = doc.get("paths", {})
    if not isinstance(paths, dict) or "reviews" not in paths:
        raise ConfigError(f"{path}: paths.reviews is required")

    out_override = os.environ.get(OUT_DIR_ENV)
    if out_override:
        out_dir = Path(out_override)
    else:
        out_dir = _opt_path(paths, "out_dir", base)
        if out_dir is None:
            raise ConfigError(f"{path}: paths.out_dir is required (or set {OUT_DIR_ENV})")

    corpus = doc.get("corpus", {}) or {}
    phrases = doc.get("phrases", {}) or {}
    entities = doc.get("entities", {}) or {}
    aspects = doc.get("aspects", {}) or {}
    embeddings = doc.get("embeddings", {}) or {}
    synsets = doc.get("synsets", {}) or {}
    scorer = doc.get("scorer", {}) or {}

    category = str(corpus.get("category", "") or "")
    cfg = PipelineConfig(
        reviews=_opt_path(paths, "reviews", base),
        out_dir=out_dir,
        seed_ontology=_opt_path(paths, "seed_ontology", base),
        truth=_opt_path(paths, "truth", base),
        aspect_scores=_opt_path(paths, "aspect_scores", base),
        relation_scores=_opt_path(paths, "relation_scores", base),
        pretagged=_opt_path(paths, "pretagged", base),
        category=category,
        product=str(corpus.get("product", "") or category),
        phrase_passes=int(phrases.get("passes", 2)),
        phrase_min_count=int(phrases.get("min_count", 5)),
        phrase_threshold=float(phrases.get("threshold", 10.0)),
        top_n_entities=int(entities.get("top_n", 200)),
        aspect_threshold=float(aspects.get("aspect_threshold", 0.65)),
        product_threshold=float(aspects.get("product_threshold", 0.45)),
        min_votes=int(aspects.get("min_votes", 3)),
        embedding_dim=int(embeddings.get("dim", 100)),
        window=int(embeddings.get("window", 4)),
        epochs=int(embeddings.get("epochs", 5)),
        negatives=int(embeddings.get("negatives", 5)),
        embedding_min_count=int(embeddings.get("min_count", 5)),
        learning_rate=float(embeddings.get("lr", 0.025)),
        edge_threshold=float(synsets.get("edge_threshold", 0.21)),
        rcs_n=int(synsets.get("rcs_n", 10)),
        max_distance=int(synsets.get("max_distance", 3)),
        scorer_backend=str(scorer.get("backend", "baseline")),
        seed=int(doc.get("seed", 13)),
        balance_seed=int(doc.get("balance_seed", 17)),
    )
    cfg.validate()
    return cfg


def write_default_config(path: str | Path) -> None:
    """Emit a commented starter config with every knob at its default."""
    text = """\
paths:
  reviews: reviews.jsonl          # input reviews, one JSON object per line
  seed_ontology: seed_ontology.json
  out_dir: out
  truth: null                     # ground-truth file for the oracle backend
  aspect_scores: null             # external score files (backend: external)
  relation_scores: null
  pretagged: null                 # optional pretagged corpus JSONL

corpus:
  category: watch                 # review category to keep; also the product name

phrases:
  passes: 2
  min_count: 5
  threshold: 10.0

entities:
  top_n: 200

aspects:
  aspect_threshold: 0.65
  product_threshold: 0.45
  min_votes: 3

embeddings:
  dim: 100
  window: 4
  epochs: 5
  negatives: 5
  min_count: 5
  lr: 0.025

synsets:
  edge_threshold: 0.21
  rcs_n: 10
  max_distance: 3

scorer:
  backend: baseline               # baseline | oracle | external

seed: 13
balance_seed: 17
"""
    Path(path).write_text(text, encoding="utf-8")
