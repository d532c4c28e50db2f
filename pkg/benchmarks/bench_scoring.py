#!/usr/bin/env python3
"""Benchmark the BM25 scoring kernels: compiled (Cython) vs pure Python.

Builds a synthetic index at a code-search-like scale, runs a batch of
queries through `SearchIndex.search` with each kernel patched in, and
reports per-query latency. Run after `pip install -e .`:

    python3 benchmarks/bench_scoring.py [--docs 19210] [--queries 200]
"""

import argparse
import time

import numpy as np

import requery.search.index as index_mod
from requery.corpus import Document
from requery.search import build_index
from requery.search._score_py import accumulate as pure_accumulate

try:
    from requery.search._score import accumulate as compiled_accumulate
except ImportError:
    compiled_accumulate = None


def synthetic_corpus(n_docs: int, vocab: int, rng) -> list[Document]:
    words = [f"term{i}" for i in range(vocab)]
    # Zipf-ish usage so postings lists vary in length like real corpora
    weights = 1.0 / np.arange(1, vocab + 1)
    weights /= weights.sum()
    docs = []
    for i in range(n_docs):
        length = int(rng.integers(8, 40))
        text = " ".join(rng.choice(words, size=length, p=weights))
        docs.append(Document(f"d{i}", text, "def f(value): return value"))
    return docs


def bench(index, queries, kernel, repeats=3) -> float:
    index_mod_accumulate = index_mod._accumulate
    index_mod._accumulate = kernel
    try:
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            for q in queries:
                index.search(q, top_n=100)
            best = min(best, time.perf_counter() - start)
        return best / len(queries)
    finally:
        index_mod._accumulate = index_mod_accumulate


def bench_kernel_only(index, kernel, repeats=200) -> float:
    """Time raw accumulate calls over every postings list in the index."""
    scores = np.zeros(index.N)
    matched = np.zeros(index.N, dtype=np.uint8)
    terms = [(o, f, index.idf(t)) for t, (o, f) in index.postings.items()]
    best = float("inf")
    for _ in range(repeats):
        scores[:] = 0.0
        matched[:] = 0
        start = time.perf_counter()
        for ordinals, freqs, idf in terms:
            kernel(scores, matched, ordinals, freqs, index.doc_len,
                   index.avg_doc_len, index.k1, index.b, idf)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=19_210)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--vocab", type=int, default=5_000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"building index over {args.docs} documents ...")
    start = time.perf_counter()
    index = build_index(synthetic_corpus(args.docs, args.vocab, rng))
    print(f"  built in {time.perf_counter() - start:.1f}s")

    words = [f"term{i}" for i in range(args.vocab)]
    queries = [" ".join(rng.choice(words[:500], size=rng.integers(2, 7)))
               for _ in range(args.queries)]

    print("\nend-to-end search (tokenize + accumulate + rank):")
    pure = bench(index, queries, pure_accumulate)
    print(f"  pure-python kernel: {pure * 1e3:8.3f} ms/query")
    if compiled_accumulate is None:
        print("  compiled kernel:    not built (pip install -e . to compile)")
        return
    fast = bench(index, queries, compiled_accumulate)
    print(f"  compiled kernel:    {fast * 1e3:8.3f} ms/query")
    print(f"  speedup:            {pure / fast:8.2f}x")

    print("\naccumulate step alone (all postings lists once):")
    pure_k = bench_kernel_only(index, pure_accumulate)
    fast_k = bench_kernel_only(index, compiled_accumulate)
    print(f"  pure-python kernel: {pure_k * 1e3:8.3f} ms/pass")
    print(f"  compiled kernel:    {fast_k * 1e3:8.3f} ms/pass")
    print(f"  speedup:            {pure_k / fast_k:8.2f}x")


if __name__ == "__main__":
    main()
