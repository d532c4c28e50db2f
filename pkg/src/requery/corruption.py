"""Span corruption: manufactures self-supervised training pairs.

A training pair is made by deleting one contiguous span covering 15% of a
query (at least one word) and replacing it with the mask sentinel. The
model later learns to regenerate the deleted span from the surrounding
context, which is exactly the skill query expansion needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from requery.corpus import MASK
from requery.errors import EmptyQuery


@dataclass(frozen=True)
class CorruptedSample:
    """A query with one span replaced by the mask sentinel.

    ``corrupted`` holds exactly one MASK token; splicing ``target_span``
    back at ``span_start`` reconstructs the original query.
    """

    corrupted: list[str]
    target_span: list[str]
    span_start: int
    span_len: int

    def original(self) -> list[str]:
        i = self.corrupted.index(MASK)
        return self.corrupted[:i] + self.target_span + self.corrupted[i + 1:]


def span_length(n: int) -> int:
    """Span size for a query of *n* words: ceil(0.15 * n), floor of one.

    Computed as ceil(3n/20) in integer arithmetic so binary rounding of
    0.15 * n can never change the result.
    """
    return max(1, -(-3 * n // 20))


def corrupt(query: list[str], rng: np.random.Generator) -> CorruptedSample:
    """Mask one uniformly-placed span of *query*.

    The span start is drawn uniformly from the valid positions; a length-1
    query degenerates to a bare mask with the whole query as target.
    """
    n = len(query)
    if n == 0:
        raise EmptyQuery("cannot corrupt an empty query")
    span_len = span_length(n)
    span_start = int(rng.integers(0, n - span_len + 1))
    corrupted = query[:span_start] + [MASK] + query[span_start + span_len:]
    return CorruptedSample(
        corrupted=corrupted,
        target_span=query[span_start:span_start + span_len],
        span_start=span_start,
        span_len=span_len,
    )


def make_training_pairs(queries: list[list[str]],
                        rng: np.random.Generator) -> list[CorruptedSample]:
    """One corrupted sample per query, in corpus order.

    Draws come from the single provided generator, so a fixed seed yields an
    identical sample sequence across runs.
    """
    if not queries:
        raise ValueError("corpus is empty")
    return [corrupt(q, rng) for q in queries]
