"""Command-line entry points: train a classifier, score an example file."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .score import score_file
from .train import TrainConfig, train


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="meronomy-trainer", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_train = sub.add_parser("train", help="fine-tune one classifier on a labeled JSONL dataset")
    p_train.add_argument("--task", required=True, choices=("aspect", "relation"))
    p_train.add_argument("--data", required=True, help="labeled examples JSONL")
    p_train.add_argument("--out", required=True, help="artifact directory to write")
    p_train.add_argument("--epochs", type=int, default=3)
    p_train.add_argument("--batch-size", type=int, default=None)
    p_train.add_argument("--optimizer", default="adam")
    p_train.add_argument("--held-out", type=float, default=0.05)
    p_train.add_argument("--learning-rate", type=float, default=2e-5)
    p_train.add_argument("--seed", type=int, default=13)
    p_train.add_argument(
        "--encoder",
        default="tiny",
        help="'tiny' trains a small encoder from scratch; anything else "
        "names a published checkpoint",
    )

    p_score = sub.add_parser("score", help="write vote triples for an examples JSONL")
    p_score.add_argument("--model", required=True, help="artifact directory from train")
    p_score.add_argument("--examples", required=True, help="examples JSONL to score")
    p_score.add_argument("--out", required=True, help="scores JSONL to write")
    p_score.add_argument("--batch-size", type=int, default=64)

    return parser


def _dispatch(args) -> dict:
    if args.command == "train":
        cfg = TrainConfig(
            task=args.task,
            epochs=args.epochs,
            batch_size=args.batch_size,
            optimizer=args.optimizer,
            held_out_fraction=args.held_out,
            learning_rate=args.learning_rate,
            seed=args.seed,
            encoder=args.encoder,
        )
        return train(args.data, cfg, args.out).to_json()
    return score_file(args.model, args.examples, args.out, batch_size=args.batch_size)


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
    try:
        summary = _dispatch(args)
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
