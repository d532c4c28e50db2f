"""Corpus ingestion, tokenization and vocabulary construction.

Queries and searchable documents are plain text; this module turns them
into word-level token sequences and builds the shared token<->id mapping
used by the infill model, the expander and the search engine.

Corpus files are UTF-8 with one JSON object per line:

* query corpus:  ``{"query": "..."}``
* search corpus: ``{"doc_id": "...", "text": "...", "code": "..."}``
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from requery.errors import CorpusFormatError, EmptyQuery

# Reserved sentinel tokens. Their surface forms contain brackets, which the
# tokenizer strips from raw text, so no input text can ever produce them.
PAD, UNK, MASK, SPAN_START, SPAN_END = "[PAD]", "[UNK]", "[MASK]", "[SPAN_START]", "[SPAN_END]"
RESERVED = (PAD, UNK, MASK, SPAN_START, SPAN_END)

PAD_ID, UNK_ID, MASK_ID, SPAN_START_ID, SPAN_END_ID = range(5)

# Splits an identifier into lowercase-able word pieces: acronym runs,
# Capitalized words, lowercase runs and digit runs.
_WORD_PIECE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|[0-9]+")


def tokenize(text: str) -> list[str]:
    """Normalize *text* into lowercase word tokens.

    Punctuation and whitespace separate tokens; camelCase, snake_case and
    letter/digit boundaries inside identifiers are split as well, since
    code-search queries routinely embed identifiers ("getHttpResponse" ->
    ["get", "http", "response"]).

    Raises:
        EmptyQuery: if nothing remains after normalization.
    """
    tokens = [piece.lower() for chunk in re.split(r"[^0-9A-Za-z]+", text)
              for piece in _WORD_PIECE.findall(chunk)]
    if not tokens:
        raise EmptyQuery(f"no tokens after normalization: {text!r}")
    return tokens


class Vocabulary:
    """Immutable token<->id mapping with five reserved sentinel ids.

    Ids 0..4 are PAD, UNK, MASK, SPAN_START and SPAN_END; content tokens
    follow from id 5. ``encode`` maps unknown tokens to UNK and ``decode``
    never emits PAD.
    """

    pad_id = PAD_ID
    unk_id = UNK_ID
    mask_id = MASK_ID
    span_start_id = SPAN_START_ID
    span_end_id = SPAN_END_ID

    def __init__(self, content_tokens: list[str]):
        seen = set(RESERVED)
        for tok in content_tokens:
            if tok in seen:
                raise ValueError(f"duplicate or reserved token in vocabulary: {tok!r}")
            seen.add(tok)
        self._token_of = list(RESERVED) + list(content_tokens)
        self._id_of = {tok: i for i, tok in enumerate(self._token_of)}

    @property
    def size(self) -> int:
        return len(self._token_of)

    def __len__(self) -> int:
        return len(self._token_of)

    def __contains__(self, token: str) -> bool:
        return token in self._id_of

    def id_of(self, token: str) -> int:
        """Id for *token*, or the UNK id when out of vocabulary."""
        return self._id_of.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self._token_of[token_id]

    def encode(self, tokens: list[str]) -> list[int]:
        """Map surface tokens to ids; out-of-vocabulary tokens become UNK."""
        return [self._id_of.get(tok, UNK_ID) for tok in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        """Map ids back to surface tokens, dropping PAD."""
        return [self._token_of[i] for i in ids if i != PAD_ID]

    def content_tokens(self) -> list[str]:
        return self._token_of[5:]

    def to_json(self) -> str:
        payload = {
            "format_version": 1,
            "reserved": {"pad": PAD_ID, "unk": UNK_ID, "mask": MASK_ID,
                         "span_start": SPAN_START_ID, "span_end": SPAN_END_ID},
            "tokens": self.content_tokens(),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format_version") != 1:
            raise CorpusFormatError(f"unsupported vocabulary format in {path}")
        return cls(payload["tokens"])


def build_vocabulary(queries: list[list[str]], max_size: int = 20_000,
                     min_freq: int = 2) -> Vocabulary:
    """Build a vocabulary from tokenized queries.

    Keeps the most frequent tokens with frequency >= *min_freq*, truncated
    to *max_size* total entries (reserved ids included). Ties in frequency
    break lexicographically, so the result is deterministic and independent
    of query order.
    """
    if not queries:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if max_size <= len(RESERVED):
        raise ValueError(f"max_size must exceed {len(RESERVED)}, got {max_size}")
    counts = Counter(tok for query in queries for tok in query)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    content = [tok for tok, freq in ranked if freq >= min_freq]
    content = content[: max_size - len(RESERVED)]
    if not content:
        raise ValueError("no token reaches min_freq; vocabulary would hold only sentinels")
    return Vocabulary(content)


@dataclass(frozen=True)
class Document:
    """One searchable record: a code snippet plus its natural-language text."""

    doc_id: str
    text: str
    code: str


def _iter_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorpusFormatError(f"{path}:{lineno}: blank line")
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc})") from exc


def load_query_corpus(path: str | Path) -> list[list[str]]:
    """Read a query corpus file and tokenize every query.

    Strict by design: a malformed or empty-tokenizing line raises with its
    line number rather than being skipped, so downstream counts always match
    the file's line count.
    """
    queries = []
    for lineno, record in _iter_jsonl(path):
        if not isinstance(record, dict) or "query" not in record:
            raise CorpusFormatError(f"{path}:{lineno}: expected an object with a 'query' field")
        try:
            queries.append(tokenize(str(record["query"])))
        except EmptyQuery as exc:
            raise CorpusFormatError(f"{path}:{lineno}: query tokenizes to nothing") from exc
    if not queries:
        raise CorpusFormatError(f"{path}: empty corpus")
    return queries


def load_search_corpus(path: str | Path) -> list[Document]:
    """Read a search corpus file of {doc_id, text, code} records."""
    docs = []
    for lineno, record in _iter_jsonl(path):
        if not isinstance(record, dict) or not {"doc_id", "text", "code"} <= record.keys():
            raise CorpusFormatError(
                f"{path}:{lineno}: expected an object with 'doc_id', 'text' and 'code'")
        if not str(record["text"]).strip():
            raise CorpusFormatError(f"{path}:{lineno}: empty 'text' field")
        docs.append(Document(doc_id=str(record["doc_id"]), text=str(record["text"]),
                             code=str(record["code"])))
    if not docs:
        raise CorpusFormatError(f"{path}: empty corpus")
    return docs


def file_sha256(path: str | Path) -> str:
    """Hash a file's bytes; used to stamp reports with their input corpora."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
