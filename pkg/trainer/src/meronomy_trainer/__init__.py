"""Neural scorers for the review-ontology pipeline.

Trains the two masked-token classifiers (single-mask aspect typing,
two-mask relation typing) on distant-supervision JSONL datasets and
writes vote-triple files the pipeline can load as an external scorer.
The only coupling to the pipeline is those two file formats.
"""

from .data import MASK, LabeledExample, read_examples, split_dataset
from .score import score_file
from .train import TrainConfig, TrainResult, train

__version__ = "0.1.0"

__all__ = [
    "MASK",
    "LabeledExample",
    "TrainConfig",
    "TrainResult",
    "read_examples",
    "score_file",
    "split_dataset",
    "train",
]
