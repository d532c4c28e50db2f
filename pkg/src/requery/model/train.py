"""Teacher-forced training on corrupted samples.

The decoder sees the ground-truth span prefix at every step and predicts
the next span token; the sequence ends with the span-end sentinel so the
model also learns when to stop. The reported loss is the mean
cross-entropy per target token (span tokens plus the end sentinel).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from requery.corpus import Vocabulary
from requery.corruption import CorruptedSample, corrupt, MASK
from requery.errors import VocabMismatch
from requery.model.config import TrainConfig, TrainReport
from requery.model.core import InfillModel
from requery.model import transformer


def encode_batch(vocab: Vocabulary, samples: Sequence[CorruptedSample],
                 max_input_len: int):
    """Pack samples into padded (src, tgt_in, tgt_out) id arrays.

    src is the corrupted query; tgt_in is [SPAN_START] + span; tgt_out is
    span + [SPAN_END]. Sources longer than max_input_len are truncated.
    """
    srcs, tgt_ins, tgt_outs = [], [], []
    for s in samples:
        if s.corrupted.count(MASK) != 1:
            raise ValueError(f"sample does not contain exactly one mask: {s.corrupted}")
        srcs.append(vocab.encode(s.corrupted)[:max_input_len])
        span = vocab.encode(s.target_span)[: max_input_len - 1]
        tgt_ins.append([vocab.span_start_id] + span)
        tgt_outs.append(span + [vocab.span_end_id])
    s_len = max(len(x) for x in srcs)
    t_len = max(len(x) for x in tgt_ins)
    pad = vocab.pad_id
    src = np.full((len(samples), s_len), pad, dtype=np.int64)
    tgt_in = np.full((len(samples), t_len), pad, dtype=np.int64)
    tgt_out = np.full((len(samples), t_len), pad, dtype=np.int64)
    for i, (a, b, c) in enumerate(zip(srcs, tgt_ins, tgt_outs)):
        src[i, :len(a)] = a
        tgt_in[i, :len(b)] = b
        tgt_out[i, :len(c)] = c
    return src, tgt_in, tgt_out


def batch_loss_and_grads(model: InfillModel, src, tgt_in, tgt_out, drop_rng=None):
    """Loss and gradients for one encoded batch.

    Raises:
        VocabMismatch: if any id falls outside the model's vocabulary.
    """
    size = model.vocab.size
    for arr in (src, tgt_in, tgt_out):
        if arr.min() < 0 or arr.max() >= size:
            raise VocabMismatch(
                f"token id outside vocabulary of size {size}: [{arr.min()}, {arr.max()}]")
    return transformer.loss_and_grads(model.params, model.config, src, tgt_in, tgt_out,
                                      model.vocab.pad_id, drop_rng)


class _Sgd:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for name, g in grads.items():
            params[name] -= self.lr * g


class _Adam:
    def __init__(self, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        for name, g in grads.items():
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m += (1 - self.b1) * (g - m)
            v += (1 - self.b2) * (g * g - v)
            mhat = m / (1 - self.b1 ** self.t)
            vhat = v / (1 - self.b2 ** self.t)
            params[name] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def _make_optimizer(cfg: TrainConfig):
    return _Adam(cfg.learning_rate) if cfg.optimizer == "adam" else _Sgd(cfg.learning_rate)


def _clip(grads, max_norm):
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale


def _run_epoch(model, samples, cfg, optimizer, drop_rng):
    total_nll = 0.0
    total_tokens = 0
    steps = 0
    for start in range(0, len(samples), cfg.batch_size):
        batch = samples[start:start + cfg.batch_size]
        src, tgt_in, tgt_out = encode_batch(model.vocab, batch, model.config.max_input_len)
        loss, n, grads = batch_loss_and_grads(model, src, tgt_in, tgt_out, drop_rng)
        if cfg.grad_clip is not None:
            _clip(grads, cfg.grad_clip)
        optimizer.step(model.params, grads)
        total_nll += loss * n
        total_tokens += n
        steps += 1
    return total_nll / total_tokens, steps


def train(model: InfillModel, samples: Sequence[CorruptedSample],
          cfg: TrainConfig) -> TrainReport:
    """Train for cfg.epochs passes over *samples*, in the given order.

    Deterministic for a fixed model seed and sample order; the caller owns
    shuffling and any per-epoch resampling (see train_on_corpus).
    """
    if not samples:
        raise ValueError("no training samples")
    drop_rng = (np.random.default_rng(model.config.seed + 1)
                if model.config.dropout > 0 else None)
    optimizer = _make_optimizer(cfg)
    report = TrainReport()
    for _ in range(cfg.epochs):
        loss, steps = _run_epoch(model, list(samples), cfg, optimizer, drop_rng)
        report.per_epoch_loss.append(float(loss))
        report.steps += steps
    return report


def train_on_corpus(model: InfillModel, queries: Sequence[list[str]], cfg: TrainConfig,
                    seed: int,
                    on_epoch: Callable[[int, float], None] | None = None) -> TrainReport:
    """Pipeline training: fresh corruption and a fresh shuffle every epoch.

    Each epoch draws one new masked span per query, so a small corpus still
    exposes the model to many (position, span) combinations. Fully
    deterministic for a fixed *seed*.
    """
    if not queries:
        raise ValueError("corpus is empty")
    rng = np.random.default_rng(seed)
    drop_rng = (np.random.default_rng(model.config.seed + 1)
                if model.config.dropout > 0 else None)
    optimizer = _make_optimizer(cfg)
    report = TrainReport()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(queries))
        samples = [corrupt(queries[i], rng) for i in order]
        loss, steps = _run_epoch(model, samples, cfg, optimizer, drop_rng)
        report.per_epoch_loss.append(float(loss))
        report.steps += steps
        if on_epoch is not None:
            on_epoch(epoch, float(loss))
    return report
