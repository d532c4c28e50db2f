"""Command-line surface for the offline pipeline and the HTTP service.

Pipeline stages mirror the offline/online split of the system: `prepare`
builds the vocabulary and the search index, `train` pre-trains the infill
model on corrupted queries, `reformulate` expands a single query, and
`evaluate`/`ablate` run the retrieval harness. `serve` exposes the same
machinery over HTTP for the console UI.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from requery import __version__
from requery.appconfig import AppConfig, load_config, require
from requery.corpus import (Vocabulary, build_vocabulary, file_sha256,
                            load_query_corpus, load_search_corpus, tokenize)
from requery.errors import RequeryError
from requery.evaluate import (ablate_k, ablate_strategy, evaluate, format_report,
                              format_table, load_eval_cases, make_reformulator,
                              write_report)
from requery.expand import ExpanderConfig, Strategy, expand
from requery.model import (InfillModel, load_checkpoint, save_checkpoint,
                           train_on_corpus)
from requery.search import build_index, load_index, save_index


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _load_model(cfg: AppConfig) -> InfillModel:
    vocab = Vocabulary.load(require(cfg.paths.vocab, "vocabulary"))
    return load_checkpoint(require(cfg.paths.checkpoint, "checkpoint"), vocab)


def _snapshot(cfg: AppConfig) -> dict:
    snap = {
        "seed": cfg.seed,
        "expander": {"k": cfg.expander.k, "m": cfg.expander.m,
                     "strategy": cfg.expander.strategy.value},
        "engine": {"k1": cfg.engine.k1, "b": cfg.engine.b, "top_n": cfg.engine.top_n},
    }
    if cfg.paths.vocab.exists():
        snap["vocab_sha256"] = Vocabulary.load(cfg.paths.vocab).sha256()
    if cfg.paths.checkpoint.exists():
        snap["checkpoint_sha256"] = file_sha256(cfg.paths.checkpoint)
    if cfg.paths.search_corpus.exists():
        snap["search_corpus_sha256"] = file_sha256(cfg.paths.search_corpus)
    return snap


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="YAML config file; defaults apply when omitted.")
@click.pass_context
def main(ctx, config_path):
    """Self-supervised query reformulation for code search."""
    try:
        ctx.obj = load_config(config_path)
    except RequeryError as exc:
        _fail(exc)


@main.command()
@click.pass_obj
def prepare(cfg: AppConfig):
    """Tokenize corpora, build the vocabulary and the search index."""
    try:
        queries = load_query_corpus(require(cfg.paths.query_corpus, "query corpus"))
        vocab = build_vocabulary(queries, max_size=cfg.vocab.max_size,
                                 min_freq=cfg.vocab.min_freq)
        cfg.paths.vocab.parent.mkdir(parents=True, exist_ok=True)
        vocab.save(cfg.paths.vocab)
        docs = load_search_corpus(require(cfg.paths.search_corpus, "search corpus"))
        index = build_index(docs, k1=cfg.engine.k1, b=cfg.engine.b)
        cfg.paths.index.parent.mkdir(parents=True, exist_ok=True)
        save_index(index, cfg.paths.index)
    except RequeryError as exc:
        _fail(exc)
    click.echo(f"queries: {len(queries)}")
    click.echo(f"vocabulary: {vocab.size} tokens -> {cfg.paths.vocab}")
    click.echo(f"documents: {len(index)} indexed -> {cfg.paths.index}")


@main.command()
@click.pass_obj
def train(cfg: AppConfig):
    """Pre-train the span-infill model on the query corpus."""
    try:
        vocab = Vocabulary.load(require(cfg.paths.vocab, "vocabulary"))
        queries = load_query_corpus(require(cfg.paths.query_corpus, "query corpus"))
        model = InfillModel(cfg.model, vocab)
        report = train_on_corpus(
            model, queries, cfg.train, seed=cfg.seed,
            on_epoch=lambda e, loss: click.echo(f"epoch {e + 1}: loss {loss:.4f}"))
        cfg.paths.checkpoint.parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(model, cfg.paths.checkpoint)
        cfg.paths.train_report.parent.mkdir(parents=True, exist_ok=True)
        cfg.paths.train_report.write_text(_canonical_json(report.to_dict()),
                                          encoding="utf-8")
    except RequeryError as exc:
        _fail(exc)
    click.echo(f"checkpoint -> {cfg.paths.checkpoint}")
    click.echo(f"train report -> {cfg.paths.train_report}")


@main.command()
@click.argument("query")
@click.option("--k", type=int, default=None, help="candidates to return")
@click.option("--m", type=int, default=None, help="generated-span length cap")
@click.option("--strategy", type=click.Choice([s.value for s in Strategy],
                                              case_sensitive=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="also write candidates as canonical JSON")
@click.pass_obj
def reformulate(cfg: AppConfig, query, k, m, strategy, out):
    """Print ranked reformulations of QUERY with their scores."""
    if not query.strip():
        raise click.UsageError("query must not be empty")
    expander = ExpanderConfig(
        k=k if k is not None else cfg.expander.k,
        m=m if m is not None else cfg.expander.m,
        strategy=Strategy(strategy.upper()) if strategy else cfg.expander.strategy)
    try:
        model = _load_model(cfg)
        rng = np.random.default_rng([cfg.seed, *map(ord, query)])
        candidates = expand(tokenize(query), model, expander, rng=rng)
    except RequeryError as exc:
        _fail(exc)
    if not candidates:
        click.echo("no non-empty expansions generated")
        return
    for cand in candidates:
        click.echo(f"ig={cand.ig:+.4f} score={cand.score:+.4f} pos={cand.position} "
                   f"| {cand.reformulated}")
    if out:
        payload = {"query": query, "strategy": expander.strategy.value,
                   "candidates": [{"position": c.position, "span": c.span,
                                   "ig": c.ig, "score": c.score,
                                   "reformulated": c.reformulated}
                                  for c in candidates]}
        Path(out).write_text(_canonical_json(payload), encoding="utf-8")
        click.echo(f"candidates -> {out}")


@main.command(name="evaluate")
@click.option("--no-reformulate", is_flag=True, help="evaluate the raw queries only")
@click.pass_obj
def evaluate_cmd(cfg: AppConfig, no_reformulate):
    """Run the MRR harness over the evaluation cases."""
    try:
        index = load_index(require(cfg.paths.index, "search index"))
        cases = load_eval_cases(require(cfg.paths.eval_cases, "evaluation cases"))
        reformulator = None
        if not no_reformulate:
            reformulator = make_reformulator(_load_model(cfg), cfg.expander,
                                             seed=cfg.seed)
        report = evaluate(index, reformulator, cases, top_n=cfg.engine.top_n,
                          use_first=cfg.use_first, config_snapshot=_snapshot(cfg))
        cfg.paths.eval_report.parent.mkdir(parents=True, exist_ok=True)
        write_report(report, cfg.paths.eval_report)
    except RequeryError as exc:
        _fail(exc)
    click.echo(format_report(report))
    click.echo(f"report -> {cfg.paths.eval_report}")


@main.command()
@click.option("--what", type=click.Choice(["strategy", "k"]), required=True)
@click.option("--seeds", default="1,2,3,4,5", show_default=True,
              help="comma-separated seeds for the RAND strategy")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def ablate(cfg: AppConfig, what, seeds, out):
    """Compare positioning strategies or candidate counts by MRR."""
    try:
        index = load_index(require(cfg.paths.index, "search index"))
        cases = load_eval_cases(require(cfg.paths.eval_cases, "evaluation cases"))
        model = _load_model(cfg)
        if what == "strategy":
            table = ablate_strategy(index, model, cases,
                                    seeds=[int(s) for s in seeds.split(",")],
                                    k=cfg.expander.k, m=cfg.expander.m,
                                    top_n=cfg.engine.top_n)
            click.echo(format_table(table, ("strategy", "MRR")))
        else:
            table = ablate_k(index, model, cases, m=cfg.expander.m,
                             top_n=cfg.engine.top_n)
            click.echo(format_table(table, ("first-k", "MRR")))
    except RequeryError as exc:
        _fail(exc)
    if out:
        Path(out).write_text(_canonical_json({"what": what, "mrr": table}),
                             encoding="utf-8")
        click.echo(f"table -> {out}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.pass_obj
def synth(cfg: AppConfig, out_dir):
    """Generate the synthetic intent benchmark corpora."""
    from requery.synth import build_benchmark, write_benchmark
    bench = build_benchmark()
    paths = write_benchmark(bench, out_dir)
    click.echo(f"queries: {len(bench.train_queries)} -> {paths['queries']}")
    click.echo(f"documents: {len(bench.documents)} -> {paths['documents']}")
    click.echo(f"cases: {len(bench.cases)} -> {paths['cases']}")


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(cfg: AppConfig, host, port):
    """Start the HTTP service (loads checkpoint and index once)."""
    import uvicorn
    from requery.service import create_app_from_config
    try:
        app = create_app_from_config(cfg)
    except RequeryError as exc:
        _fail(exc)
    uvicorn.run(app, host=host or cfg.service.host, port=port or cfg.service.port)


if __name__ == "__main__":
    main()
