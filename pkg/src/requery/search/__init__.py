"""Lexical ranked retrieval over the search corpus (BM25 inverted index).

The per-term score accumulation is the hot loop; a compiled Cython kernel
is used when the extension built, with a numpy fallback otherwise. See
``requery.search.index.USING_COMPILED_KERNEL`` and benchmarks/bench_scoring.py.
"""

from requery.search.index import (
    SearchIndex,
    RankedResult,
    build_index,
    load_index,
    save_index,
    USING_COMPILED_KERNEL,
)

__all__ = [
    "SearchIndex", "RankedResult", "build_index", "load_index", "save_index",
    "USING_COMPILED_KERNEL",
]
