"""BM25 inverted index over {doc_id, text, code} documents.

Each document is indexed as the concatenation of its natural-language text
and its code, run through the shared corpus tokenizer so queries and
documents agree on identifier splitting. Scoring uses BM25 with
idf = ln((N - df + 0.5) / (df + 0.5) + 1); repeated query tokens
contribute once per occurrence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from requery.corpus import Document, tokenize
from requery.errors import CorpusFormatError, DuplicateDocument, EmptyQuery

try:
    from requery.search._score import accumulate as _accumulate
    USING_COMPILED_KERNEL = True
except ImportError:
    from requery.search._score_py import accumulate as _accumulate
    USING_COMPILED_KERNEL = False

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    score: float


class SearchIndex:
    """Immutable after construction; concurrent searches are safe."""

    def __init__(self, postings: dict[str, tuple[np.ndarray, np.ndarray]],
                 doc_len: np.ndarray, doc_ids: list[str],
                 k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.postings = postings           # term -> (ordinals int32, freqs float64)
        self.doc_len = doc_len
        self.doc_ids = doc_ids
        self.N = len(doc_ids)
        self.avg_doc_len = float(doc_len.mean())
        self.k1 = k1
        self.b = b
        self._ordinal_of = {doc_id: i for i, doc_id in enumerate(doc_ids)}
        self._doc_id_arr = np.asarray(doc_ids)  # unicode compare == str compare

    def __len__(self) -> int:
        return self.N

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self._ordinal_of

    def idf(self, term: str) -> float:
        df = len(self.postings[term][0]) if term in self.postings else 0
        return float(np.log((self.N - df + 0.5) / (df + 0.5) + 1.0))

    def search(self, query: str, top_n: int = 100) -> list[RankedResult]:
        """Top *top_n* documents by BM25, ties broken by doc_id ascending.

        Only documents matching at least one query term are returned, so the
        result can be shorter than top_n (empty when nothing matches).

        Raises:
            EmptyQuery: if the query tokenizes to nothing.
        """
        if top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {top_n}")
        terms = tokenize(query)  # raises EmptyQuery on degenerate input
        scores = np.zeros(self.N)
        matched = np.zeros(self.N, dtype=np.uint8)
        for term in terms:
            if term not in self.postings:
                continue
            ordinals, freqs = self.postings[term]
            _accumulate(scores, matched, ordinals, freqs, self.doc_len,
                        self.avg_doc_len, self.k1, self.b, self.idf(term))
        hits = np.flatnonzero(matched)
        if hits.size == 0:
            return []
        # primary key: score descending; ties: doc_id ascending
        order = np.lexsort((self._doc_id_arr[hits], -scores[hits]))[:top_n]
        ranked = hits[order]
        return [RankedResult(doc_id=self.doc_ids[o], score=float(scores[o]))
                for o in ranked]


def build_index(documents: list[Document], k1: float = DEFAULT_K1,
                b: float = DEFAULT_B) -> SearchIndex:
    """Index text+code of every document; deterministic for a given corpus.

    Raises:
        DuplicateDocument: on a repeated doc_id.
    """
    if not documents:
        raise ValueError("cannot index an empty corpus")
    seen: set[str] = set()
    doc_ids: list[str] = []
    doc_len = np.zeros(len(documents))
    term_docs: dict[str, dict[int, int]] = {}
    for ordinal, doc in enumerate(documents):
        if doc.doc_id in seen:
            raise DuplicateDocument(f"doc_id {doc.doc_id!r} appears more than once")
        seen.add(doc.doc_id)
        doc_ids.append(doc.doc_id)
        try:
            tokens = tokenize(doc.text + " " + doc.code)
        except EmptyQuery:
            tokens = []
        doc_len[ordinal] = len(tokens)
        for tok in tokens:
            counts = term_docs.setdefault(tok, {})
            counts[ordinal] = counts.get(ordinal, 0) + 1
    postings = {}
    for term, counts in term_docs.items():
        ordinals = np.fromiter(sorted(counts), dtype=np.int32, count=len(counts))
        freqs = np.asarray([counts[o] for o in ordinals], dtype=np.float64)
        postings[term] = (ordinals, freqs)
    return SearchIndex(postings, doc_len, doc_ids, k1=k1, b=b)


def save_index(index: SearchIndex, path: str | Path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "k1": index.k1,
        "b": index.b,
        "doc_ids": index.doc_ids,
        "doc_len": index.doc_len.tolist(),
        "postings": {term: [ordinals.tolist(), freqs.tolist()]
                     for term, (ordinals, freqs) in index.postings.items()},
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8")


def load_index(path: str | Path) -> SearchIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != FORMAT_VERSION:
        raise CorpusFormatError(f"unsupported index format in {path}")
    postings = {term: (np.asarray(ordinals, dtype=np.int32),
                       np.asarray(freqs, dtype=np.float64))
                for term, (ordinals, freqs) in payload["postings"].items()}
    return SearchIndex(postings, np.asarray(payload["doc_len"], dtype=np.float64),
                       payload["doc_ids"], k1=payload["k1"], b=payload["b"])
