"""requery: self-supervised query reformulation for code search.

Pipeline: build a vocabulary from an unlabeled query corpus, pre-train a
span-infill model on mask-corrupted queries, then reformulate incoming
queries by enumerating insertion positions, generating candidate spans
and keeping the positions the model is most certain about. A BM25 engine
and an MRR harness measure whether reformulation improves retrieval.
"""

__version__ = "0.1.0"
