"""Meronomy extraction from product reviews.

The package turns a corpus of raw review texts into a part-of ontology
for a product category: sentences are tokenized and phrased, frequent
noun entities are extracted, per-sentence classifier votes are
aggregated into an aspect list, aspects are grouped into synsets via
review-domain word embeddings, and a relation matrix between synsets is
assembled into a rooted ontology tree.
"""

__version__ = "0.1.0"

MASK = "[MASK]"
