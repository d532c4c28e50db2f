"""HTTP service exposing reformulation and search to the console UI.

One frozen model and one index are loaded at startup; every request is a
pure read over them, so concurrent handling needs no locking. All errors
come back as ``{"error": "..."}`` with a meaningful status code.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from requery.appconfig import AppConfig, require
from requery.corpus import Document, Vocabulary, load_search_corpus, tokenize
from requery.errors import ConfigError, EmptyQuery
from requery.expand import ExpanderConfig, Strategy, expand
from requery.model import load_checkpoint
from requery.model.core import InfillModel
from requery.search import load_index
from requery.search.index import SearchIndex

SNIPPET_CHARS = 160


class ReformulateRequest(BaseModel):
    query: str
    k: int | None = None
    m: int | None = None
    strategy: str | None = None


class SearchRequest(BaseModel):
    query: str
    top_n: int | None = None


def create_app(model: InfillModel | None = None, index: SearchIndex | None = None,
               documents: list[Document] | None = None,
               expander: ExpanderConfig | None = None, seed: int = 101,
               default_top_n: int = 100, ui_dir: Path | None = None) -> FastAPI:
    """Assemble the service around already-loaded components.

    Components may be None (e.g. no checkpoint trained yet); the affected
    endpoints then answer 503 and /health reports what is missing.
    """
    app = FastAPI(title="requery", docs_url=None, redoc_url=None)
    defaults = expander or ExpanderConfig()
    snippets = {d.doc_id: d.text for d in documents or []}

    @app.exception_handler(RequestValidationError)
    async def on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "invalid request body"}, status_code=400)

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    @app.get("/health")
    async def health():
        return {"status": "ok", "model_loaded": model is not None,
                "index_docs": 0 if index is None else len(index)}

    @app.post("/reformulate")
    async def reformulate(body: ReformulateRequest):
        if model is None:
            return error(503, "no model checkpoint loaded")
        try:
            tokens = tokenize(body.query)
        except EmptyQuery:
            return error(400, "query is empty after normalization")
        try:
            cfg = ExpanderConfig(
                k=body.k if body.k is not None else defaults.k,
                m=body.m if body.m is not None else defaults.m,
                strategy=Strategy(body.strategy.upper()) if body.strategy
                else defaults.strategy)
        except (ValueError, ConfigError) as exc:  # bad k/m/strategy values
            return error(400, str(exc))
        rng = np.random.default_rng([seed, *map(ord, body.query)])
        candidates = expand(tokens, model, cfg, rng=rng)
        return {"candidates": [{"reformulated": c.reformulated, "position": c.position,
                                "span": c.span, "ig": c.ig, "score": c.score}
                               for c in candidates]}

    @app.post("/search")
    async def search(body: SearchRequest):
        if index is None:
            return error(503, "no search index loaded")
        top_n = body.top_n if body.top_n is not None else default_top_n
        if top_n < 1:
            return error(400, "top_n must be >= 1")
        try:
            results = index.search(body.query, top_n=top_n)
        except EmptyQuery:
            return error(400, "query is empty after normalization")
        return {"results": [{"doc_id": r.doc_id, "score": r.score,
                             "text_snippet": snippets.get(r.doc_id, "")[:SNIPPET_CHARS]}
                            for r in results]}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def create_app_from_config(cfg: AppConfig) -> FastAPI:
    """Load vocab, checkpoint, index and corpus from config paths."""
    index = None
    documents = None
    model = None
    if cfg.paths.index.exists():
        index = load_index(cfg.paths.index)
    if cfg.paths.search_corpus.exists():
        documents = load_search_corpus(cfg.paths.search_corpus)
    if cfg.paths.checkpoint.exists():
        vocab = Vocabulary.load(require(cfg.paths.vocab, "vocabulary"))
        model = load_checkpoint(cfg.paths.checkpoint, vocab)
    return create_app(model=model, index=index, documents=documents,
                      expander=cfg.expander, seed=cfg.seed,
                      default_top_n=cfg.engine.top_n, ui_dir=cfg.service.ui_dir)
