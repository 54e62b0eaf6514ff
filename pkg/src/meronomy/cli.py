"""Command-line interface for the extraction pipeline.

Exit codes: 0 on success, 1 for usage problems, 2 for data or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, write_default_config

logger = logging.getLogger("meronomy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="meronomy", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, help_text: str, config: bool = True):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("-c", "--config", required=True, help="pipeline config YAML")
            p.add_argument(
                "--force",
                action="store_true",
                help="accept artifacts stamped with a different config hash",
            )
        return p

    add("ingest", "load reviews, split sentences, learn and apply phrases")
    add("entities", "count noun occurrences and keep the most frequent")
    add("annotate", "build distant-supervision training sets from the seed ontology")
    add("score", "emit aspect candidates and score them")
    add("aspects", "aggregate aspect votes into accepted aspects")
    add("embed", "train word embeddings on the phrased corpus")
    add("synsets", "cluster aspect terms into synsets; emit relation candidates")
    add("ontology", "score relation candidates and build the ontology tree")
    add("all", "run every pipeline stage in order")

    p_eval = add("evaluate", "score human relation judgments")
    p_eval.add_argument("--judgments", required=True, help="judgments CSV")

    p_qa = add("qa-eval", "measure ontology coverage of questions and answers")
    p_qa.add_argument("--qa", required=True, help="Q&A JSONL file")

    add("report", "render figures and CSV summaries from the artifacts")

    p_synth = sub.add_parser("synth", help="generate the synthetic benchmark corpus")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=13)

    p_init = sub.add_parser("init-config", help="write a starter config file")
    p_init.add_argument("--out", default="meronomy.yaml", help="where to write it")

    return parser


def _dispatch(args) -> dict:
    from . import pipeline, report, synthetic

    if args.command == "synth":
        gen = synthetic.generate_corpus(args.out, seed=args.seed)
        return {
            "reviews": str(gen.reviews_path),
            "seed_ontology": str(gen.seed_ontology_path),
            "truth": str(gen.truth_path),
            "n_reviews": gen.n_reviews,
            "n_sentences": gen.n_sentences,
        }

    if args.command == "init-config":
        out = Path(args.out)
        if out.exists():
            raise ConfigError(f"{out} already exists; not overwriting")
        write_default_config(out)
        return {"config": str(out)}

    cfg = load_config(args.config)
    if getattr(args, "force", False):
        cfg.force = True

    if args.command == "evaluate":
        return pipeline.run_evaluate(cfg, Path(args.judgments))
    if args.command == "qa-eval":
        return pipeline.run_qa_eval(cfg, Path(args.qa))
    if args.command == "report":
        return report.run_report(cfg)
    if args.command == "all":
        return pipeline.run_all(cfg)
    return pipeline.STAGE_RUNNERS[args.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_help()
        return 1
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    from .pipeline import PipelineError

    try:
        summary = _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, PipelineError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
