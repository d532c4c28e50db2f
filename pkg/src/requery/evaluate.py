"""Retrieval evaluation: mean reciprocal rank and the reformulation protocol.

For every case the harness searches the first few reformulations of the
query (or just the query itself), finds the best rank achieved by the
single relevant document, and aggregates reciprocal ranks across cases.
A miss (relevant document outside the top_n of every search) counts 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from requery.corpus import tokenize
from requery.errors import CorpusFormatError, CorruptFixture, EmptyEvaluation
from requery.expand import ExpanderConfig, Strategy, expand
from requery.model.core import InfillModel
from requery.search.index import RankedResult


class SearchEngine(Protocol):
    """What the evaluator needs from an engine; any backend qualifies."""

    def search(self, query: str, top_n: int = ...) -> list[RankedResult]: ...
    def has_doc(self, doc_id: str) -> bool: ...
    def __len__(self) -> int: ...


Reformulator = Callable[[str], list[str]]


@dataclass(frozen=True)
class EvalCase:
    query: str
    relevant_doc_id: str


def load_eval_cases(path: str | Path) -> list[EvalCase]:
    """Read a JSONL file of {"query": ..., "relevant_doc_id": ...} records."""
    cases = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorpusFormatError(f"{path}:{lineno}: blank line")
            record = json.loads(line)
            if not {"query", "relevant_doc_id"} <= record.keys():
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 'query' and 'relevant_doc_id'")
            cases.append(EvalCase(query=str(record["query"]),
                                  relevant_doc_id=str(record["relevant_doc_id"])))
    if not cases:
        raise CorpusFormatError(f"{path}: no evaluation cases")
    return cases


@dataclass
class PerQueryResult:
    query: str
    best_rank: int | None
    reciprocal: float
    chosen_reformulation: str | None

    def to_dict(self) -> dict:
        return {"query": self.query, "best_rank": self.best_rank,
                "reciprocal": self.reciprocal,
                "chosen_reformulation": self.chosen_reformulation}


@dataclass
class EvalReport:
    mrr: float
    per_query: list[PerQueryResult]
    config_snapshot: dict = field(default_factory=dict)


def mrr(reciprocals: Sequence[float]) -> float:
    """Arithmetic mean of reciprocal ranks.

    Raises:
        EmptyEvaluation: on an empty sequence.
    """
    if len(reciprocals) == 0:
        raise EmptyEvaluation("no queries to aggregate")
    bad = [r for r in reciprocals if not 0.0 <= r <= 1.0]
    if bad:
        raise ValueError(f"reciprocal ranks must lie in [0, 1]: {bad[:3]}")
    return float(sum(reciprocals) / len(reciprocals))


def _rank_of(results: list[RankedResult], doc_id: str) -> int | None:
    for i, r in enumerate(results, start=1):
        if r.doc_id == doc_id:
            return i
    return None


def evaluate(engine: SearchEngine, reformulator: Reformulator | None,
             cases: Sequence[EvalCase], top_n: int = 100,
             use_first: int = 3, config_snapshot: dict | None = None) -> EvalReport:
    """Run the retrieval protocol over *cases*.

    With a reformulator, each case searches the first *use_first* candidate
    reformulations (in the reformulator's own order) and keeps the best
    rank of the relevant document; without one, it searches the raw query.

    Raises:
        CorruptFixture: if any relevant_doc_id is missing from the engine.
    """
    missing = [c.relevant_doc_id for c in cases if not engine.has_doc(c.relevant_doc_id)]
    if missing:
        raise CorruptFixture(f"relevant documents not in corpus: {missing[:5]}")
    per_query = []
    for case in cases:
        queries = [case.query] if reformulator is None else list(reformulator(case.query))[:use_first]
        best_rank: int | None = None
        chosen: str | None = None
        for q in queries:
            rank = _rank_of(engine.search(q, top_n=top_n), case.relevant_doc_id)
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                chosen = q if reformulator is not None else None
        per_query.append(PerQueryResult(
            query=case.query, best_rank=best_rank,
            reciprocal=0.0 if best_rank is None else 1.0 / best_rank,
            chosen_reformulation=chosen))
    report = EvalReport(mrr=mrr([r.reciprocal for r in per_query]), per_query=per_query)
    report.config_snapshot = dict(config_snapshot or {})
    report.config_snapshot.update({"top_n": top_n, "use_first": use_first,
                                   "reformulated": reformulator is not None})
    return report


def make_reformulator(model: InfillModel, cfg: ExpanderConfig,
                      seed: int | None = None) -> Reformulator:
    """Wrap a model + expander config as a query -> reformulations callable.

    RAND draws its positions from a generator seeded per call with
    (seed, query hash) so runs are reproducible yet queries independent.
    """
    def reformulate(query: str) -> list[str]:
        tokens = tokenize(query)
        rng = None
        if cfg.strategy is Strategy.RAND:
            base = 0 if seed is None else seed
            rng = np.random.default_rng([base, *map(ord, query)])
        return [c.reformulated for c in expand(tokens, model, cfg, rng=rng)]
    return reformulate


def ablate_strategy(engine: SearchEngine, model: InfillModel, cases: Sequence[EvalCase],
                    strategies: Iterable[Strategy] = (Strategy.RAND, Strategy.PROB, Strategy.ENTR),
                    seeds: Sequence[int] = (1, 2, 3, 4, 5), k: int = 3, m: int = 10,
                    top_n: int = 100) -> dict[str, float]:
    """MRR per positioning strategy; RAND is averaged over *seeds*."""
    table: dict[str, float] = {}
    for strategy in strategies:
        cfg = ExpanderConfig(k=k, m=m, strategy=strategy)
        if strategy is Strategy.RAND:
            runs = [evaluate(engine, make_reformulator(model, cfg, seed=s), cases,
                             top_n=top_n, use_first=k).mrr for s in seeds]
            table[strategy.value] = float(sum(runs) / len(runs))
        else:
            table[strategy.value] = evaluate(engine, make_reformulator(model, cfg),
                                             cases, top_n=top_n, use_first=k).mrr
    return table


def ablate_k(engine: SearchEngine, model: InfillModel, cases: Sequence[EvalCase],
             k_values: Sequence[int] = (1, 2, 3), m: int = 10,
             top_n: int = 100) -> dict[int, float]:
    """MRR as a function of how many top candidates are searched.

    One reformulator generates max(k_values) candidates; each k then uses
    the first k of that same list, so the candidate sets are prefixes of
    one another and MRR is non-decreasing in k by construction.
    """
    cfg = ExpanderConfig(k=max(k_values), m=m, strategy=Strategy.ENTR)
    reformulator = make_reformulator(model, cfg)
    return {k: evaluate(engine, reformulator, cases, top_n=top_n, use_first=k).mrr
            for k in k_values}


# ---------------------------------------------------------------------------
# report output

def format_table(rows: dict, header: tuple[str, str]) -> str:
    """Two-column fixed-width table for terminal output."""
    width = max(len(header[0]), *(len(str(k)) for k in rows)) + 2
    lines = [f"{header[0]:<{width}}{header[1]}", "-" * (width + len(header[1]))]
    for key, value in rows.items():
        lines.append(f"{str(key):<{width}}{value:.4f}")
    return "\n".join(lines)


def format_report(report: EvalReport) -> str:
    lines = [f"MRR: {report.mrr:.4f}  ({len(report.per_query)} queries)"]
    hits = sum(1 for r in report.per_query if r.best_rank is not None)
    lines.append(f"retrieved within cutoff: {hits}/{len(report.per_query)}")
    return "\n".join(lines)


def write_report(report: EvalReport, path: str | Path) -> None:
    """Line-delimited JSON: one summary line, then one line per query."""
    with open(path, "w", encoding="utf-8") as fh:
        summary = {"type": "summary", "mrr": report.mrr,
                   "queries": len(report.per_query),
                   "config": report.config_snapshot}
        fh.write(json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n")
        for row in report.per_query:
            record = {"type": "case", **row.to_dict()}
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
