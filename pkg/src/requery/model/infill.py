"""Autoregressive span generation with full per-step distributions.

Every decode step keeps the whole probability vector over the vocabulary,
not just the chosen token: the expander scores candidate positions by the
entropy of exactly these distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from requery.errors import MalformedInput
from requery.model.core import InfillModel


@dataclass
class SpanPrediction:
    """Generated span ids plus one vocabulary distribution per decode step.

    ``span`` holds content tokens only. When generation stopped at the
    span-end sentinel, ``distributions`` has one extra row (the step that
    emitted the sentinel); when it hit the length cap, rows == len(span).
    """

    span: list[int]
    distributions: np.ndarray  # (steps, vocab_size)

    @property
    def terminated(self) -> bool:
        return self.distributions.shape[0] == len(self.span) + 1

    def content_distributions(self) -> np.ndarray:
        """Rows for content tokens only; the end-sentinel step is dropped."""
        return self.distributions[: len(self.span)]


def infill(model: InfillModel, corrupted: list[str], m: int = 10,
           mode: str = "greedy", rng: np.random.Generator | None = None) -> SpanPrediction:
    """Generate the masked span of *corrupted* (surface tokens, one mask).

    Decoding stops at the span-end sentinel or after *m* content tokens.
    "greedy" takes the argmax each step (numpy argmax already breaks ties
    toward the lowest id); "sample" draws from the distribution using *rng*.

    Raises:
        MalformedInput: unless the input holds exactly one mask sentinel.
    """
    if m < 1:
        raise ValueError(f"span cap must be >= 1, got {m}")
    if mode not in ("greedy", "sample"):
        raise ValueError(f"unknown decode mode {mode!r}")
    if mode == "sample" and rng is None:
        raise ValueError("sampled decoding needs a random generator")
    ids = model.vocab.encode(corrupted)
    if ids.count(model.vocab.mask_id) != 1:
        raise MalformedInput(
            f"expected exactly one mask token, found {ids.count(model.vocab.mask_id)}")

    src = np.asarray([ids], dtype=np.int64)
    enc_out, src_key_mask = model.encode_source(src)
    prefix = [model.vocab.span_start_id]
    span: list[int] = []
    rows = []
    while True:
        dist = model.next_token_distribution(
            np.asarray([prefix], dtype=np.int64), enc_out, src_key_mask)[0]
        rows.append(dist)
        if mode == "greedy":
            token = int(np.argmax(dist))
        else:
            token = int(rng.choice(len(dist), p=dist))
        if token == model.vocab.span_end_id:
            break
        span.append(token)
        prefix.append(token)
        if len(span) == m:
            break
    return SpanPrediction(span=span, distributions=np.asarray(rows))
