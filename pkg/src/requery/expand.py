"""Query expansion: enumerate insertion points, infill, rank by certainty.

A query of n words has n+1 insertion positions (before the first word,
between each pair, after the last). Each position becomes a masked query;
the infill model generates a span for it; positions whose spans the model
is most certain about carry the most information, so candidates are ranked
by the mean negative entropy of the per-step token distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from requery.corpus import MASK
from requery.errors import ConfigError, EmptyQuery, EmptySpan
from requery.model.core import InfillModel
from requery.model.infill import SpanPrediction, infill


class Strategy(str, Enum):
    """How to pick the expansion positions.

    RAND: k positions uniformly at random (baseline).
    PROB: positions whose generated tokens had the highest mean log-probability.
    ENTR: positions with the lowest mean entropy over the full distributions.
    """

    RAND = "RAND"
    PROB = "PROB"
    ENTR = "ENTR"


@dataclass(frozen=True)
class ExpanderConfig:
    k: int = 3              # candidates to return
    m: int = 10             # generated-span length cap
    strategy: Strategy = Strategy.ENTR

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")


@dataclass
class CandidateExpansion:
    """One scored reformulation.

    ``ig`` is the mean negative entropy of the generated span in nats
    (always in [-ln |V|, 0]); ``score`` is the strategy's sort key — equal
    to ``ig`` for ENTR, the mean log-probability of the emitted tokens for
    PROB, and ``ig`` (reporting only, no sorting) for RAND.
    """

    position: int
    span: list[str]
    ig: float
    reformulated: str
    score: float


def enumerate_candidates(query: list[str]) -> list[list[str]]:
    """All n+1 variants of *query* with one mask inserted at a word boundary."""
    if not query:
        raise EmptyQuery("cannot expand an empty query")
    return [query[:i] + [MASK] + query[i:] for i in range(len(query) + 1)]


def information_gain(prediction: SpanPrediction) -> float:
    """Mean negative entropy of the content-step distributions, in nats.

    Sums p * ln p over the whole vocabulary for every content step (taking
    0 * ln 0 = 0) and averages over steps; the end-sentinel step carries no
    query content and is excluded.

    Raises:
        EmptySpan: if the prediction has no content tokens.
    """
    dists = prediction.content_distributions()
    if dists.shape[0] == 0:
        raise EmptySpan("prediction holds no content tokens")
    safe = np.where(dists > 0.0, dists, 1.0)
    return float((dists * np.log(safe)).sum(axis=1).mean())


def mean_log_prob(prediction: SpanPrediction) -> float:
    """Mean ln p of the tokens actually emitted (content steps only)."""
    dists = prediction.content_distributions()
    if dists.shape[0] == 0:
        raise EmptySpan("prediction holds no content tokens")
    picked = dists[np.arange(len(prediction.span)), prediction.span]
    return float(np.log(picked).mean())


def splice(query: list[str], position: int, span: list[str]) -> str:
    """Insert *span* into *query* at word boundary *position*; returns a string."""
    if not 0 <= position <= len(query):
        raise IndexError(f"position {position} out of range for {len(query)} words")
    if not span:
        raise ValueError("cannot splice an empty span")
    return " ".join(query[:position] + list(span) + query[position:])


def _predict(model: InfillModel, query: list[str], position: int, m: int,
             mode: str, rng) -> tuple[CandidateExpansion, SpanPrediction] | None:
    masked = query[:position] + [MASK] + query[position:]
    pred = infill(model, masked, m=m, mode=mode, rng=rng)
    span = model.vocab.decode(pred.span)  # drops PAD, keeps everything else
    if not span:
        return None
    ig = information_gain(pred)
    return CandidateExpansion(position=position, span=span, ig=ig,
                              reformulated=splice(query, position, span),
                              score=ig), pred


def expand(query: list[str], model: InfillModel, cfg: ExpanderConfig,
           rng: np.random.Generator | None = None,
           mode: str = "greedy") -> list[CandidateExpansion]:
    """Produce up to cfg.k reformulations of *query*.

    ENTR and PROB infill all n+1 positions, drop empty spans, keep the best
    scoring candidate per distinct reformulated string, and return the top
    k by score (ties to the smaller position). RAND infills min(k, n+1)
    randomly chosen positions and returns them in position order.

    Returns an empty list when every generated span is empty.
    """
    if not query:
        raise EmptyQuery("cannot expand an empty query")
    n = len(query)

    if cfg.strategy is Strategy.RAND:
        if rng is None:
            raise ConfigError("RAND strategy needs a seeded random generator")
        count = min(cfg.k, n + 1)
        positions = sorted(int(i) for i in rng.choice(n + 1, size=count, replace=False))
        out = []
        for pos in positions:
            hit = _predict(model, query, pos, cfg.m, mode, rng)
            if hit is not None:
                out.append(hit[0])
        return out

    candidates: list[CandidateExpansion] = []
    for pos in range(n + 1):
        hit = _predict(model, query, pos, cfg.m, mode, rng)
        if hit is None:
            continue
        cand, pred = hit
        if cfg.strategy is Strategy.PROB:
            cand.score = mean_log_prob(pred)
        candidates.append(cand)

    best: dict[str, CandidateExpansion] = {}
    for cand in candidates:
        kept = best.get(cand.reformulated)
        if kept is None or (cand.score, -cand.position) > (kept.score, -kept.position):
            best[cand.reformulated] = cand
    ranked = sorted(best.values(), key=lambda c: (-c.score, c.position))
    return ranked[: cfg.k]


def max_entropy(vocab_size: int) -> float:
    """Lower bound of any ig value: -ln |V| (entropy of the uniform distribution)."""
    return -math.log(vocab_size)
