"""Shared fixtures: the planted-ontology corpus and full pipeline runs.

The full run is expensive (embedding training dominates), so it is a
session fixture shared by the end-to-end tests. A second independent
run backs the determinism checks.
"""

import os
import time
from dataclasses import dataclass
from pathlib import Path

import pytest
import yaml

from meronomy import pipeline, synthetic
from meronomy.config import PipelineConfig, load_config

# A stray out-dir override would redirect every run in the suite.
os.environ.pop("MERONOMY_OUT_DIR", None)

# Settings under which the generated corpus is known to separate
# synonyms from unrelated aspect terms.
RUN_SETTINGS = {
    "corpus": {"category": synthetic.CATEGORY},
    "embeddings": {"dim": 48, "epochs": 12},
    "scorer": {"backend": "oracle"},
    "seed": 13,
}


@dataclass(frozen=True)
class PlantedCorpus:
    root: Path
    gen: synthetic.GeneratedCorpus


@dataclass(frozen=True)
class CompletedRun:
    cfg: PipelineConfig
    config_path: Path
    summary: dict
    elapsed: float

    @property
    def out_dir(self) -> Path:
        return self.cfg.out_dir


def write_run_config(path: Path, data_dir: Path, out_dir: Path, **overrides) -> Path:
    doc = {
        "paths": {
            "reviews": str(data_dir / "reviews.jsonl"),
            "seed_ontology": str(data_dir / "seed_ontology.json"),
            "truth": str(data_dir / "truth.json"),
            "out_dir": str(out_dir),
        },
    }
    for section, values in RUN_SETTINGS.items():
        doc[section] = dict(values) if isinstance(values, dict) else values
    for section, values in overrides.items():
        if isinstance(values, dict):
            doc.setdefault(section, {}).update(values)
        else:
            doc[section] = values
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def planted_corpus(tmp_path_factory) -> PlantedCorpus:
    root = tmp_path_factory.mktemp("planted_data")
    gen = synthetic.generate_corpus(root, seed=13)
    return PlantedCorpus(root=root, gen=gen)


def _run_all(planted_corpus: PlantedCorpus, run_dir: Path) -> CompletedRun:
    config_path = write_run_config(
        run_dir / "config.yaml", planted_corpus.root, run_dir / "out"
    )
    cfg = load_config(config_path)
    t0 = time.perf_counter()
    summary = pipeline.run_all(cfg)
    elapsed = time.perf_counter() - t0
    return CompletedRun(cfg=cfg, config_path=config_path, summary=summary, elapsed=elapsed)


@pytest.fixture(scope="session")
def pipeline_run(planted_corpus, tmp_path_factory) -> CompletedRun:
    return _run_all(planted_corpus, tmp_path_factory.mktemp("run_a"))


@pytest.fixture(scope="session")
def pipeline_run_repeat(planted_corpus, tmp_path_factory) -> CompletedRun:
    return _run_all(planted_corpus, tmp_path_factory.mktemp("run_b"))


TINY_REVIEWS = [
    "The watch is great. The band is soft.",
    "My watch was fine and the screen is bright.",
    "This band was not good.",
    "The screen is very sharp. I like the watch.",
    "The watch is okay but the band is loose.",
    "That watch was nice.",
    "The band is fine. The screen was dim.",
    "My screen is great and my watch is slow.",
    "The watch was decent. The band was tight.",
    "This screen is not bad.",
]


@pytest.fixture()
def tiny_corpus(tmp_path) -> Path:
    """A ten-review corpus for fast pipeline-mechanics tests."""
    import json

    path = tmp_path / "reviews.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for i, text in enumerate(TINY_REVIEWS):
            fh.write(
                json.dumps({"id": f"r{i}", "category": "watch", "text": text}) + "\n"
            )
    return path
