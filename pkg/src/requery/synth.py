"""Synthetic intent benchmark generator.

Builds a desk-scale world in which query expansion provably matters and
positioning strategies can be told apart:

* complete queries follow "how to VERB a OBJECT in LANG", where LANG is a
  deterministic function of (VERB, OBJECT);
* the document corpus holds one document per (verb, object, language)
  triple, so a query stripped of its "in LANG" tail ties against every
  language variant of its combo and retrieval only becomes precise when
  the reformulator restores the language;
* every other insertion position is anchored by filler patterns ("how to
  quickly VERB ...", "... a large OBJECT ...") drawn from several
  interchangeable words per combo, so spans generated there are ambiguous
  (high entropy) and retrieval-neutral (fillers never appear in documents).

An entropy-guided expander should therefore put the end position first,
while random positioning only finds the language half the time. Used by
the acceptance suite and the `requery synth` command.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from requery.corpus import Document
from requery.evaluate import EvalCase

VERBS = ["reverse", "sort", "merge", "parse", "split",
         "join", "filter", "copy", "search", "encode"]
OBJECTS = ["array", "string", "dictionary", "tree", "matrix",
           "queue", "stack", "graph", "buffer", "stream"]
LANGS = ["java", "python", "ruby", "go", "rust", "swift", "kotlin", "scala"]

# One filler pattern per non-final insertion position of "how to VERB a
# OBJECT"; each offers interchangeable words so no single completion is
# ever certain there.
PREFIX_PAIRS = [("please", "show"), ("someone", "explain"),
                ("quick", "guide"), ("best", "method")]
HOW_X_TO = ["best", "exactly", "fast", "properly"]
PRE_VERB = ["quickly", "safely", "easily", "correctly"]
POST_VERB = ["carefully", "twice", "manually", "gently"]
ADJECTIVES = ["large", "small", "nested", "shared"]

LANG_PATTERN_COPIES = 2   # extra weight keeps the language span the most certain
VARIANTS_PER_PATTERN = 2  # >= 2 distinct fillers per combo keep entropy >= ln 2


def lang_for(verb_idx: int, n_langs: int) -> int:
    """Language is a fixed function of the verb alone.

    Supervision for "which language completes this query" then pools
    across every object the verb combines with, so a desk-scale model can
    learn the mapping reliably within a couple of minutes of training.
    """
    return (7 * verb_idx) % n_langs


@dataclass
class Benchmark:
    train_queries: list[str]       # complete queries, with the language
    documents: list[Document]
    cases: list[EvalCase]          # incomplete queries, language removed


def build_benchmark(n_verbs: int = 10, n_objects: int = 8, n_langs: int = 8,
                    case_stride: int = 2, seed: int = 7) -> Benchmark:
    """Deterministic benchmark over n_verbs * n_objects combos.

    Every combo yields the language pattern (twice), two variants of each
    filler pattern, n_langs documents, and (every *case_stride*-th combo)
    one evaluation case.
    """
    verbs, objects, langs = VERBS[:n_verbs], OBJECTS[:n_objects], LANGS[:n_langs]
    train_queries: list[str] = []
    documents: list[Document] = []
    cases: list[EvalCase] = []
    combo = 0
    for vi, verb in enumerate(verbs):
        for oi, obj in enumerate(objects):
            lang = langs[lang_for(vi, len(langs))]
            rng = np.random.default_rng([seed, combo])

            train_queries += [f"how to {verb} a {obj} in {lang}"] * LANG_PATTERN_COPIES

            def pick(options):
                take = min(VARIANTS_PER_PATTERN, len(options))
                return [options[i] for i in rng.choice(len(options), size=take,
                                                       replace=False)]

            for first, second in pick(PREFIX_PAIRS):
                train_queries.append(f"{first} {second} how to {verb} a {obj}")
            for word in pick(HOW_X_TO):
                train_queries.append(f"how {word} to {verb} a {obj}")
            for word in pick(PRE_VERB):
                train_queries.append(f"how to {word} {verb} a {obj}")
            for word in pick(POST_VERB):
                train_queries.append(f"how to {verb} {word} a {obj}")
            for word in pick(ADJECTIVES):
                train_queries.append(f"how to {verb} a {word} {obj}")

            for cand in langs:
                documents.append(Document(
                    doc_id=f"{verb}-{obj}-{cand}",
                    text=f"{verb} a {obj} in {cand}",
                    code=f"def {verb}_{obj}(value):\n    return {cand}_lib.{verb}(value)"))
            if combo % case_stride == 0:
                cases.append(EvalCase(query=f"how to {verb} a {obj}",
                                      relevant_doc_id=f"{verb}-{obj}-{lang}"))
            combo += 1
    return Benchmark(train_queries=train_queries, documents=documents, cases=cases)


def write_benchmark(bench: Benchmark, out_dir: str | Path) -> dict[str, Path]:
    """Write the three corpus files; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"queries": out / "queries.jsonl", "documents": out / "documents.jsonl",
             "cases": out / "cases.jsonl"}
    with open(paths["queries"], "w", encoding="utf-8") as fh:
        for q in bench.train_queries:
            fh.write(json.dumps({"query": q}, sort_keys=True) + "\n")
    with open(paths["documents"], "w", encoding="utf-8") as fh:
        for d in bench.documents:
            fh.write(json.dumps({"doc_id": d.doc_id, "text": d.text, "code": d.code},
                                sort_keys=True) + "\n")
    with open(paths["cases"], "w", encoding="utf-8") as fh:
        for c in bench.cases:
            fh.write(json.dumps({"query": c.query, "relevant_doc_id": c.relevant_doc_id},
                                sort_keys=True) + "\n")
    return paths
