"""Stage orchestration: each stage reads prior artifacts and writes its own.

Artifacts live in the configured output directory and carry the config
hash that produced them. A stage refuses an input artifact stamped with
a different hash unless the config sets force, and a missing input
fails with the name of the stage that would have produced it.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable

from . import annotate, aspects, embeddings, entities, ontology, phrases, scoring, synsets
from .config import PipelineConfig
from .corpus import (
    LoadStats,
    load_reviews,
    read_sentences,
    split_and_tokenize,
    write_sentences,
)
from .postag import LexiconTagger, PretaggedCorpusTagger

logger = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """Data or sequencing problem; maps to exit code 2 in the CLI."""


# artifact name -> (filename, producing stage)
ARTIFACTS = {
    "sentences": ("sentences.jsonl", "ingest"),
    "phrases": ("phrases.json", "ingest"),
    "entities": ("entities.json", "entities"),
    "aspect_train": ("aspect_train.jsonl", "annotate"),
    "relation_train": ("relation_train.jsonl", "annotate"),
    "aspect_candidates": ("aspect_candidates.jsonl", "score"),
    "aspect_scores": ("aspect_scores.jsonl", "score"),
    "aspects": ("aspects.jsonl", "aspects"),
    "embeddings": ("embeddings.txt", "embed"),
    "synsets": ("synsets.json", "synsets"),
    "relation_candidates": ("relation_candidates.jsonl", "synsets"),
    "relation_scores": ("relation_scores.jsonl", "ontology"),
    "relation_matrix": ("relation_matrix.csv", "ontology"),
    "ontology": ("ontology.json", "ontology"),
}

PIPELINE_STAGES = (
    "ingest",
    "entities",
    "annotate",
    "score",
    "aspects",
    "embed",
    "synsets",
    "ontology",
)


def artifact_path(cfg: PipelineConfig, name: str) -> Path:
    return cfg.out_dir / ARTIFACTS[name][0]


def require_artifact(cfg: PipelineConfig, name: str) -> Path:
    path = artifact_path(cfg, name)
    if not path.exists():
        filename, stage = ARTIFACTS[name]
        raise PipelineError(
            f"missing artifact {filename}: run the {stage!r} stage first"
        )
    _check_stamp(cfg, path)
    return path


def read_stamp(path: Path) -> dict | None:
    """The _meta stamp of an artifact, or None if it has none."""
    try:
        if path.suffix == ".jsonl":
            with path.open("r", encoding="utf-8") as fh:
                first = fh.readline().strip()
            if not first:
                return None
            obj = json.loads(first)
            return obj.get("_meta")
        if path.suffix == ".json":
            return json.loads(path.read_text(encoding="utf-8")).get("_meta")
        with path.open("r", encoding="utf-8") as fh:
            first = fh.readline().strip()
        if first.startswith("# "):
            return json.loads(first[2:])
        if first.startswith("#"):
            return json.loads(first[1:])
        return None
    except (json.JSONDecodeError, OSError):
        return None


def _check_stamp(cfg: PipelineConfig, path: Path) -> None:
    stamp = read_stamp(path)
    if stamp is None:
        return
    found = stamp.get("config_hash")
    expected = cfg.config_hash()
    if found is not None and found != expected:
        if cfg.force:
            logger.warning(
                "%s was produced under config %s, current is %s (forced on)",
                path,
                found,
                expected,
            )
            return
        raise PipelineError(
            f"{path} was produced under config {found}, current config is {expected}; "
            "rerun the producing stage or pass --force"
        )


def _tagger(cfg: PipelineConfig):
    if cfg.pretagged is not None:
        return PretaggedCorpusTagger(cfg.pretagged)
    return LexiconTagger()


def _phrased_sentences(cfg: PipelineConfig) -> list:
    return list(read_sentences(require_artifact(cfg, "sentences")))


def run_ingest(cfg: PipelineConfig) -> dict:
    """Load reviews, split and tokenize, learn and apply phrase joins."""
    if not cfg.reviews.exists():
        raise PipelineError(f"reviews file not found: {cfg.reviews}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    stats = LoadStats()
    sentences = []
    for review in load_reviews(cfg.reviews, category_filter=cfg.category or None, stats=stats):
        sentences.extend(split_and_tokenize(review))
    if not sentences:
        raise PipelineError(f"no sentences survived ingestion from {cfg.reviews}")
    model = phrases.learn_phrases(
        sentences,
        passes=cfg.phrase_passes,
        min_count=cfg.phrase_min_count,
        threshold=cfg.phrase_threshold,
    )
    phrased = [phrases.apply_phrases(model, s) for s in sentences]
    model.save(artifact_path(cfg, "phrases"), meta=cfg.stamp("ingest"))
    n = write_sentences(artifact_path(cfg, "sentences"), phrased, meta=cfg.stamp("ingest"))
    logger.info(
        "ingest: %d reviews read, %d skipped, %d sentences", stats.read, stats.skipped, n
    )
    return {"reviews": stats.read, "skipped": stats.skipped, "sentences": n}


def run_entities(cfg: PipelineConfig) -> dict:
    sentences = _phrased_sentences(cfg)
    top = entities.top_entities(sentences, _tagger(cfg), n=cfg.top_n_entities)
    entities.write_entities(
        artifact_path(cfg, "entities"),
        {cfg.category or "all": top},
        meta=cfg.stamp("entities"),
    )
    logger.info("entities: kept %d frequent entities", len(top))
    return {"entities": len(top)}


def _load_entities(cfg: PipelineConfig) -> list[str]:
    table = entities.read_entities(require_artifact(cfg, "entities"))
    counts = table[cfg.category or "all"]
    return [ec.entity for ec in counts]


def run_annotate(cfg: PipelineConfig) -> dict:
    """Distant-supervision training sets from the seed ontology."""
    if cfg.seed_ontology is None:
        raise PipelineError("paths.seed_ontology is required for the annotate stage")
    if not cfg.seed_ontology.exists():
        raise PipelineError(f"seed ontology not found: {cfg.seed_ontology}")
    seed = annotate.SeedOntology.load(cfg.seed_ontology)
    product = cfg.product or cfg.category
    if product not in seed.products:
        raise PipelineError(
            f"seed ontology has no product {product!r}; found {sorted(seed.products)}"
        )
    sentences = _phrased_sentences(cfg)
    frequent = _load_entities(cfg)

    aspect_raw = list(annotate.generate_aspect_examples(sentences, seed, product, frequent))
    relation_raw = list(annotate.generate_relation_examples(sentences, seed, product))
    try:
        aspect_train = annotate.balance_classes(aspect_raw, cfg.balance_seed)
        relation_train = annotate.balance_classes(relation_raw, cfg.balance_seed)
    except ValueError as exc:
        raise PipelineError(f"annotate: {exc}") from exc
    annotate.write_examples(
        artifact_path(cfg, "aspect_train"), aspect_train, meta=cfg.stamp("annotate")
    )
    annotate.write_examples(
        artifact_path(cfg, "relation_train"), relation_train, meta=cfg.stamp("annotate")
    )
    logger.info(
        "annotate: %d aspect examples (%d raw), %d relation examples (%d raw)",
        len(aspect_train),
        len(aspect_raw),
        len(relation_train),
        len(relation_raw),
    )
    return {"aspect_train": len(aspect_train), "relation_train": len(relation_train)}


def _build_scorer(cfg: PipelineConfig, task: str):
    if cfg.scorer_backend == "oracle":
        if not cfg.truth.exists():
            raise PipelineError(f"truth file not found: {cfg.truth}")
        return scoring.OracleScorer.from_truth_file(cfg.truth)
    train_name = "aspect_train" if task == "aspect" else "relation_train"
    train = annotate.read_examples(require_artifact(cfg, train_name))
    return scoring.BaselineScorer().fit(train)


def _score_candidates(cfg: PipelineConfig, task: str, candidates: list, out_name: str) -> int:
    """Score candidates in-process, or validate external scores, and persist."""
    external = cfg.aspect_scores if task == "aspect" else cfg.relation_scores
    if cfg.scorer_backend == "external":
        if external is None or not external.exists():
            raise PipelineError(
                f"external {task} scores not found; score "
                f"{artifact_path(cfg, task + '_candidates')} with your scorer and point "
                f"paths.{task}_scores at the result"
            )
        try:
            table = scoring.load_external_scores(external)
        except ValueError as exc:
            raise PipelineError(str(exc)) from exc
        records = []
        for ex in candidates:
            key = (ex.sentence_id, task)
            if key not in table:
                raise PipelineError(f"{external}: no score for candidate {ex.sentence_id!r}")
            records.append(
                scoring.ScoreRecord(sentence_id=ex.sentence_id, task=task, votes=table[key])
            )
    else:
        scorer = _build_scorer(cfg, task)
        records = list(scoring.score_examples(scorer, candidates))
    return scoring.write_scores(
        artifact_path(cfg, out_name), records, meta=cfg.stamp(ARTIFACTS[out_name][1])
    )


def run_score(cfg: PipelineConfig) -> dict:
    """Emit aspect candidates and their probability triples."""
    sentences = _phrased_sentences(cfg)
    frequent = _load_entities(cfg)
    product = cfg.product or cfg.category
    candidates = list(annotate.generate_aspect_examples(sentences, None, product, frequent))
    if not candidates:
        raise PipelineError("no single-entity sentences to score; corpus too sparse")
    annotate.write_examples(
        artifact_path(cfg, "aspect_candidates"), candidates, meta=cfg.stamp("score")
    )
    n = _score_candidates(cfg, "aspect", candidates, "aspect_scores")
    logger.info("score: %d aspect candidates scored (%s)", n, cfg.scorer_backend)
    return {"aspect_candidates": n}


def run_aspects(cfg: PipelineConfig) -> dict:
    candidates = [
        ex
        for ex in annotate.read_examples(require_artifact(cfg, "aspect_candidates"))
        if isinstance(ex, annotate.AspectExample)
    ]
    votes = scoring.load_external_scores(require_artifact(cfg, "aspect_scores"))
    try:
        stats = aspects.aggregate_aspect_votes(
            candidates,
            votes,
            aspect_threshold=cfg.aspect_threshold,
            product_threshold=cfg.product_threshold,
            min_votes=cfg.min_votes,
        )
    except KeyError as exc:
        raise PipelineError(str(exc)) from exc
    aspects.write_aspects(artifact_path(cfg, "aspects"), stats, meta=cfg.stamp("aspects"))
    accepted = aspects.aspect_terms(stats)
    prods = aspects.product_terms(stats)
    if not prods:
        raise PipelineError(
            "no entity cleared the product threshold; cannot anchor an ontology"
        )
    logger.info(
        "aspects: %d entities voted on, %d accepted, %d product aspects",
        len(stats),
        len(accepted),
        len(prods),
    )
    return {"voted": len(stats), "accepted": len(accepted), "product": len(prods)}


def run_embed(cfg: PipelineConfig) -> dict:
    sentences = _phrased_sentences(cfg)
    stats = aspects.read_aspects(require_artifact(cfg, "aspects"))
    keep = aspects.aspect_terms(stats)
    table = embeddings.train_cbow(
        sentences,
        d=cfg.embedding_dim,
        window=cfg.window,
        seed=cfg.seed,
        epochs=cfg.epochs,
        negatives=cfg.negatives,
        min_count=cfg.embedding_min_count,
        lr=cfg.learning_rate,
        keep_terms=keep,
    )
    table.config["_meta"] = cfg.stamp("embed")
    table.save(artifact_path(cfg, "embeddings"))
    logger.info(
        "embed: %d terms, d=%d, final loss %.4f",
        len(table),
        table.d,
        table.loss_history[-1],
    )
    return {"vocab": len(table), "loss": table.loss_history}


def run_synsets(cfg: PipelineConfig) -> dict:
    table = embeddings.EmbeddingTable.load(require_artifact(cfg, "embeddings"))
    stats = aspects.read_aspects(require_artifact(cfg, "aspects"))
    feature_terms = [s.entity for s in stats if s.is_aspect and not s.is_product]
    product_terms = aspects.product_terms(stats)
    sentences = _phrased_sentences(cfg)
    all_terms = feature_terms + product_terms
    term_counts = entities.count_term_occurrences(sentences, all_terms)

    graph = synsets.build_synonym_graph(
        table, feature_terms, tau_edge=cfg.edge_threshold, n=cfg.rcs_n
    )
    try:
        groups = synsets.cluster_synsets(
            graph, product_terms, k=cfg.max_distance, term_counts=term_counts
        )
    except ValueError as exc:
        raise PipelineError(f"synsets: {exc}") from exc
    synsets.write_synsets(artifact_path(cfg, "synsets"), groups, meta=cfg.stamp("synsets"))

    candidates = list(ontology.synset_relation_candidates(sentences, groups))
    annotate.write_examples(
        artifact_path(cfg, "relation_candidates"), candidates, meta=cfg.stamp("synsets")
    )
    logger.info(
        "synsets: %d synsets (%d feature terms), %d relation candidates",
        len(groups),
        len(feature_terms),
        len(candidates),
    )
    return {"synsets": len(groups), "relation_candidates": len(candidates)}


def _write_matrix_csv(cfg: PipelineConfig, rm: ontology.RelationMatrix) -> None:
    path = artifact_path(cfg, "relation_matrix")
    with path.open("w", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(cfg.stamp("ontology"), sort_keys=True) + "\n")
        fh.write("synset," + ",".join(rm.ids) + "\n")
        for sid in rm.ids:
            row = rm.row(sid)
            fh.write(sid + "," + ",".join("%.12g" % x for x in row) + "\n")


def run_ontology(cfg: PipelineConfig) -> dict:
    groups = synsets.read_synsets(require_artifact(cfg, "synsets"))
    candidates = [
        ex
        for ex in annotate.read_examples(require_artifact(cfg, "relation_candidates"))
        if isinstance(ex, annotate.RelationExample)
    ]
    sentences = _phrased_sentences(cfg)
    all_terms = [t for s in groups for t in s.terms]
    term_counts = entities.count_term_occurrences(sentences, all_terms)

    _score_candidates(cfg, "relation", candidates, "relation_scores")
    votes = scoring.load_external_scores(artifact_path(cfg, "relation_scores"))
    vm = ontology.accumulate_votes(candidates, groups, votes, term_counts=term_counts)
    try:
        rm = ontology.relation_matrix(vm)
    except ValueError as exc:
        raise PipelineError(f"ontology: {exc}") from exc
    _write_matrix_csv(cfg, rm)

    product = cfg.product or cfg.category or "product"
    tree = ontology.build_tree(rm, groups, product, term_counts=term_counts)
    ontology.write_tree(artifact_path(cfg, "ontology"), tree, meta=cfg.stamp("ontology"))
    logger.info(
        "ontology: %d nodes under root %r", len(groups), tree.label(tree.root_id)
    )
    return {"nodes": len(groups), "root": tree.root_id}


def run_evaluate(cfg: PipelineConfig, judgments_path: Path) -> dict:
    """Score human relation judgments: precision, relative recall, F1, kappa."""
    from . import evaluation
    from .report import format_method_table

    if not Path(judgments_path).exists():
        raise PipelineError(f"judgments file not found: {judgments_path}")
    try:
        judgments = evaluation.read_judgments(judgments_path)
        methods = evaluation.evaluate_methods(judgments)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    kappa = evaluation.agreement_kappa(judgments)
    f1s = [m.f1 for m in methods if m.f1 is not None]
    doc = {
        "_meta": cfg.stamp("evaluate"),
        "methods": [
            {
                "method": m.method,
                "n_relations": m.n_relations,
                "n_true": m.n_true,
                "precision": m.precision,
                "relative_recall": m.relative_recall,
                "f1": m.f1,
            }
            for m in methods
        ],
        "macro_f1": evaluation.macro_f1(f1s) if f1s else None,
        "fleiss_kappa": kappa,
    }
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_json = cfg.out_dir / "evaluation.json"
    out_json.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    out_txt = cfg.out_dir / "evaluation.txt"
    out_txt.write_text(format_method_table(methods, kappa), encoding="utf-8")
    logger.info("evaluate: %d methods, kappa=%s", len(methods), kappa)
    return {"methods": len(methods), "fleiss_kappa": kappa}


def run_qa_eval(cfg: PipelineConfig, qa_path: Path) -> dict:
    """Measure ontology coverage of a question/answer file."""
    from . import evaluation
    from .ontology import read_tree

    if not Path(qa_path).exists():
        raise PipelineError(f"Q&A file not found: {qa_path}")
    tree = read_tree(require_artifact(cfg, "ontology"))
    try:
        instances = evaluation.read_qa_instances(qa_path)
        p_a, p_r = evaluation.qa_eval(tree, instances)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    doc = {
        "_meta": cfg.stamp("qa-eval"),
        "instances": len(instances),
        "p_aspect": p_a,
        "p_relation": p_r,
    }
    out_json = cfg.out_dir / "qa_metrics.json"
    out_json.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("qa-eval: %d instances, p_a=%.2f%%, p_r=%.2f%%", len(instances), p_a, p_r)
    return {"instances": len(instances), "p_aspect": p_a, "p_relation": p_r}


def run_all(cfg: PipelineConfig) -> dict:
    summary = {}
    for stage in PIPELINE_STAGES:
        summary[stage] = STAGE_RUNNERS[stage](cfg)
    return summary


STAGE_RUNNERS = {
    "ingest": run_ingest,
    "entities": run_entities,
    "annotate": run_annotate,
    "score": run_score,
    "aspects": run_aspects,
    "embed": run_embed,
    "synsets": run_synsets,
    "ontology": run_ontology,
}
