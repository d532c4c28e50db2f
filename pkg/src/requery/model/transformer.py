"""A small encoder-decoder transformer in plain numpy.

The encoder reads a corrupted query (one mask sentinel somewhere inside);
the decoder regenerates the missing span token by token. Everything is
written as pure functions over a flat ``{name: ndarray}`` parameter dict:

* forward passes return caches instead of mutating state, so a frozen
  model can serve concurrent callers;
* backward passes are hand-derived and checked against central finite
  differences in the test suite;
* float64 throughout — the matrices are tiny, and exact reproducibility
  plus clean gradient checks are worth more than f32 speed here.

Pre-norm residual blocks with a final layer norm; sinusoidal positions;
ReLU feed-forward; learned output projection (untied from the embedding).
"""

from __future__ import annotations

import numpy as np

from requery.model.config import ModelConfig

NEG_INF = -1e9   # additive attention mask; finite so softmax backprop stays exact
LN_EPS = 1e-5


# ---------------------------------------------------------------------------
# primitives

def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def positional_encoding(length: int, dim: int) -> np.ndarray:
    """Sinusoidal position table, shape (length, dim)."""
    pos = np.arange(length, dtype=np.float64)[:, None]
    i = np.arange(dim // 2, dtype=np.float64)[None, :]
    angles = pos / np.power(10000.0, 2.0 * i / dim)
    pe = np.zeros((length, dim))
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles[:, : dim - dim // 2])
    return pe


def _ln_forward(x, g, b):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv)


def _ln_backward(dy, cache, g):
    xhat, inv = cache
    axes = tuple(range(dy.ndim - 1))
    dg = (dy * xhat).sum(axis=axes)
    db = dy.sum(axis=axes)
    dxhat = dy * g
    dx = inv * (dxhat
                - dxhat.mean(-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(-1, keepdims=True))
    return dx, dg, db


def _dropout_forward(x, p, rng):
    if p <= 0.0 or rng is None:
        return x, None
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * keep, keep


def _dropout_backward(dy, keep):
    return dy if keep is None else dy * keep


def _mha_forward(p, pre, xq, xkv, add_mask, heads):
    """Multi-head attention. add_mask broadcasts to (B, heads, Tq, Tk)."""
    B, Tq, d = xq.shape
    Tk = xkv.shape[1]
    dh = d // heads
    q = xq @ p[pre + ".wq"] + p[pre + ".bq"]
    k = xkv @ p[pre + ".wk"] + p[pre + ".bk"]
    v = xkv @ p[pre + ".wv"] + p[pre + ".bv"]
    qh = q.reshape(B, Tq, heads, dh).transpose(0, 2, 1, 3)
    kh = k.reshape(B, Tk, heads, dh).transpose(0, 2, 1, 3)
    vh = v.reshape(B, Tk, heads, dh).transpose(0, 2, 1, 3)
    scores = qh @ kh.transpose(0, 1, 3, 2) / np.sqrt(dh) + add_mask
    probs = softmax(scores)
    ctx = probs @ vh
    merged = ctx.transpose(0, 2, 1, 3).reshape(B, Tq, d)
    out = merged @ p[pre + ".wo"] + p[pre + ".bo"]
    return out, (xq, xkv, qh, kh, vh, probs, merged)


def _mha_backward(p, pre, dout, cache, grads, heads):
    xq, xkv, qh, kh, vh, probs, merged = cache
    B, Tq, d = xq.shape
    Tk = xkv.shape[1]
    dh = d // heads
    grads[pre + ".wo"] += merged.reshape(-1, d).T @ dout.reshape(-1, d)
    grads[pre + ".bo"] += dout.sum((0, 1))
    dmerged = dout @ p[pre + ".wo"].T
    dctx = dmerged.reshape(B, Tq, heads, dh).transpose(0, 2, 1, 3)
    dprobs = dctx @ vh.transpose(0, 1, 3, 2)
    dvh = probs.transpose(0, 1, 3, 2) @ dctx
    dscores = (dprobs - (dprobs * probs).sum(-1, keepdims=True)) * probs
    dscores /= np.sqrt(dh)
    dqh = dscores @ kh
    dkh = dscores.transpose(0, 1, 3, 2) @ qh
    dq = dqh.transpose(0, 2, 1, 3).reshape(B, Tq, d)
    dk = dkh.transpose(0, 2, 1, 3).reshape(B, Tk, d)
    dv = dvh.transpose(0, 2, 1, 3).reshape(B, Tk, d)
    grads[pre + ".wq"] += xq.reshape(-1, d).T @ dq.reshape(-1, d)
    grads[pre + ".bq"] += dq.sum((0, 1))
    grads[pre + ".wk"] += xkv.reshape(-1, d).T @ dk.reshape(-1, d)
    grads[pre + ".bk"] += dk.sum((0, 1))
    grads[pre + ".wv"] += xkv.reshape(-1, d).T @ dv.reshape(-1, d)
    grads[pre + ".bv"] += dv.sum((0, 1))
    dxq = dq @ p[pre + ".wq"].T
    dxkv = dk @ p[pre + ".wk"].T + dv @ p[pre + ".wv"].T
    return dxq, dxkv


def _ffn_forward(p, pre, x):
    h = x @ p[pre + ".w1"] + p[pre + ".b1"]
    hr = np.maximum(h, 0.0)
    out = hr @ p[pre + ".w2"] + p[pre + ".b2"]
    return out, (x, h, hr)


def _ffn_backward(p, pre, dout, cache, grads):
    x, h, hr = cache
    d = x.shape[-1]
    f = h.shape[-1]
    grads[pre + ".w2"] += hr.reshape(-1, f).T @ dout.reshape(-1, d)
    grads[pre + ".b2"] += dout.sum((0, 1))
    dhr = dout @ p[pre + ".w2"].T
    dh = dhr * (h > 0.0)
    grads[pre + ".w1"] += x.reshape(-1, d).T @ dh.reshape(-1, f)
    grads[pre + ".b1"] += dh.sum((0, 1))
    return dh @ p[pre + ".w1"].T


# ---------------------------------------------------------------------------
# parameters

def init_params(cfg: ModelConfig, vocab_size: int) -> dict[str, np.ndarray]:
    """Deterministic Glorot initialization from cfg.seed.

    Two calls with equal (cfg, vocab_size) produce bit-identical arrays;
    parameter insertion order is fixed and shared with the checkpoint
    format and the optimizers.
    """
    rng = np.random.default_rng(cfg.seed)
    d, f = cfg.embed_dim, cfg.feedforward_dim
    p: dict[str, np.ndarray] = {}

    def glorot(rows, cols):
        std = np.sqrt(2.0 / (rows + cols))
        return rng.normal(0.0, std, size=(rows, cols))

    def add_attention(pre):
        for name in ("wq", "wk", "wv", "wo"):
            p[f"{pre}.{name}"] = glorot(d, d)
        for name in ("bq", "bk", "bv", "bo"):
            p[f"{pre}.{name}"] = np.zeros(d)

    def add_ln(pre):
        p[f"{pre}.g"] = np.ones(d)
        p[f"{pre}.b"] = np.zeros(d)

    def add_ffn(pre):
        p[f"{pre}.w1"] = glorot(d, f)
        p[f"{pre}.b1"] = np.zeros(f)
        p[f"{pre}.w2"] = glorot(f, d)
        p[f"{pre}.b2"] = np.zeros(d)

    p["emb"] = rng.normal(0.0, d ** -0.5, size=(vocab_size, d))
    for i in range(cfg.layers):
        add_ln(f"enc{i}.ln1")
        add_attention(f"enc{i}.attn")
        add_ln(f"enc{i}.ln2")
        add_ffn(f"enc{i}.ffn")
    add_ln("enc_ln")
    for i in range(cfg.layers):
        add_ln(f"dec{i}.ln1")
        add_attention(f"dec{i}.self")
        add_ln(f"dec{i}.ln2")
        add_attention(f"dec{i}.cross")
        add_ln(f"dec{i}.ln3")
        add_ffn(f"dec{i}.ffn")
    add_ln("dec_ln")
    p["out.w"] = glorot(d, vocab_size)
    p["out.b"] = np.zeros(vocab_size)
    return p


def zero_grads(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.items()}


# ---------------------------------------------------------------------------
# embedding and masks

def _embed(p, cfg, ids):
    d = cfg.embed_dim
    T = ids.shape[1]
    if T > cfg.max_input_len:
        raise ValueError(f"sequence length {T} exceeds max_input_len {cfg.max_input_len}")
    return p["emb"][ids] * np.sqrt(d) + positional_encoding(T, d)[None, :, :]


def _key_pad_mask(ids, pad_id):
    """(B, 1, 1, T) additive mask hiding PAD keys."""
    return np.where(ids[:, None, None, :] == pad_id, NEG_INF, 0.0)


def _causal_mask(T):
    return np.triu(np.full((1, 1, T, T), NEG_INF), k=1)


# ---------------------------------------------------------------------------
# encoder / decoder stacks

def encoder_forward(p, cfg, src_ids, pad_id, drop_rng=None):
    """Returns (enc_out, src_key_mask, cache)."""
    x = _embed(p, cfg, src_ids)
    x, emb_keep = _dropout_forward(x, cfg.dropout, drop_rng)
    key_mask = _key_pad_mask(src_ids, pad_id)
    layer_caches = []
    for i in range(cfg.layers):
        a_in, ln1c = _ln_forward(x, p[f"enc{i}.ln1.g"], p[f"enc{i}.ln1.b"])
        attn, ac = _mha_forward(p, f"enc{i}.attn", a_in, a_in, key_mask, cfg.heads)
        attn, akeep = _dropout_forward(attn, cfg.dropout, drop_rng)
        x1 = x + attn
        f_in, ln2c = _ln_forward(x1, p[f"enc{i}.ln2.g"], p[f"enc{i}.ln2.b"])
        ff, fc = _ffn_forward(p, f"enc{i}.ffn", f_in)
        ff, fkeep = _dropout_forward(ff, cfg.dropout, drop_rng)
        x = x1 + ff
        layer_caches.append((ln1c, ac, akeep, ln2c, fc, fkeep))
    out, final_lnc = _ln_forward(x, p["enc_ln.g"], p["enc_ln.b"])
    cache = (src_ids, emb_keep, layer_caches, final_lnc)
    return out, key_mask, cache


def encoder_backward(p, cfg, dout, cache, grads):
    src_ids, emb_keep, layer_caches, final_lnc = cache
    dx, dg, db = _ln_backward(dout, final_lnc, p["enc_ln.g"])
    grads["enc_ln.g"] += dg
    grads["enc_ln.b"] += db
    for i in reversed(range(cfg.layers)):
        ln1c, ac, akeep, ln2c, fc, fkeep = layer_caches[i]
        dff = _dropout_backward(dx, fkeep)
        df_in = _ffn_backward(p, f"enc{i}.ffn", dff, fc, grads)
        dx1, dg, db = _ln_backward(df_in, ln2c, p[f"enc{i}.ln2.g"])
        grads[f"enc{i}.ln2.g"] += dg
        grads[f"enc{i}.ln2.b"] += db
        dx1 = dx1 + dx
        dattn = _dropout_backward(dx1, akeep)
        dq, dkv = _mha_backward(p, f"enc{i}.attn", dattn, ac, grads, cfg.heads)
        da_in = dq + dkv
        dxe, dg, db = _ln_backward(da_in, ln1c, p[f"enc{i}.ln1.g"])
        grads[f"enc{i}.ln1.g"] += dg
        grads[f"enc{i}.ln1.b"] += db
        dx = dx1 + dxe
    dx = _dropout_backward(dx, emb_keep)
    np.add.at(grads["emb"], src_ids.ravel(),
              dx.reshape(-1, cfg.embed_dim) * np.sqrt(cfg.embed_dim))


def decoder_forward(p, cfg, tgt_in_ids, enc_out, src_key_mask, pad_id, drop_rng=None):
    """Returns (logits, cache). Logit row t predicts the token after prefix t."""
    x = _embed(p, cfg, tgt_in_ids)
    x, emb_keep = _dropout_forward(x, cfg.dropout, drop_rng)
    T = tgt_in_ids.shape[1]
    self_mask = _causal_mask(T) + _key_pad_mask(tgt_in_ids, pad_id)
    layer_caches = []
    for i in range(cfg.layers):
        a_in, ln1c = _ln_forward(x, p[f"dec{i}.ln1.g"], p[f"dec{i}.ln1.b"])
        attn, sc = _mha_forward(p, f"dec{i}.self", a_in, a_in, self_mask, cfg.heads)
        attn, skeep = _dropout_forward(attn, cfg.dropout, drop_rng)
        x1 = x + attn
        c_in, ln2c = _ln_forward(x1, p[f"dec{i}.ln2.g"], p[f"dec{i}.ln2.b"])
        cross, cc = _mha_forward(p, f"dec{i}.cross", c_in, enc_out, src_key_mask, cfg.heads)
        cross, ckeep = _dropout_forward(cross, cfg.dropout, drop_rng)
        x2 = x1 + cross
        f_in, ln3c = _ln_forward(x2, p[f"dec{i}.ln3.g"], p[f"dec{i}.ln3.b"])
        ff, fc = _ffn_forward(p, f"dec{i}.ffn", f_in)
        ff, fkeep = _dropout_forward(ff, cfg.dropout, drop_rng)
        x = x2 + ff
        layer_caches.append((ln1c, sc, skeep, ln2c, cc, ckeep, ln3c, fc, fkeep))
    dec_out, final_lnc = _ln_forward(x, p["dec_ln.g"], p["dec_ln.b"])
    logits = dec_out @ p["out.w"] + p["out.b"]
    cache = (tgt_in_ids, emb_keep, layer_caches, final_lnc, dec_out)
    return logits, cache


def decoder_backward(p, cfg, dlogits, cache, grads):
    """Backprop the decoder; returns d(enc_out) accumulated over layers."""
    tgt_in_ids, emb_keep, layer_caches, final_lnc, dec_out = cache
    d = cfg.embed_dim
    grads["out.w"] += dec_out.reshape(-1, d).T @ dlogits.reshape(-1, dlogits.shape[-1])
    grads["out.b"] += dlogits.sum((0, 1))
    ddec_out = dlogits @ p["out.w"].T
    dx, dg, db = _ln_backward(ddec_out, final_lnc, p["dec_ln.g"])
    grads["dec_ln.g"] += dg
    grads["dec_ln.b"] += db
    denc_out = None
    for i in reversed(range(cfg.layers)):
        ln1c, sc, skeep, ln2c, cc, ckeep, ln3c, fc, fkeep = layer_caches[i]
        dff = _dropout_backward(dx, fkeep)
        df_in = _ffn_backward(p, f"dec{i}.ffn", dff, fc, grads)
        dx2, dg, db = _ln_backward(df_in, ln3c, p[f"dec{i}.ln3.g"])
        grads[f"dec{i}.ln3.g"] += dg
        grads[f"dec{i}.ln3.b"] += db
        dx2 = dx2 + dx
        dcross = _dropout_backward(dx2, ckeep)
        dc_in, dkv = _mha_backward(p, f"dec{i}.cross", dcross, cc, grads, cfg.heads)
        denc_out = dkv if denc_out is None else denc_out + dkv
        dx1, dg, db = _ln_backward(dc_in, ln2c, p[f"dec{i}.ln2.g"])
        grads[f"dec{i}.ln2.g"] += dg
        grads[f"dec{i}.ln2.b"] += db
        dx1 = dx1 + dx2
        dattn = _dropout_backward(dx1, skeep)
        dq, dself_kv = _mha_backward(p, f"dec{i}.self", dattn, sc, grads, cfg.heads)
        da_in = dq + dself_kv
        dxe, dg, db = _ln_backward(da_in, ln1c, p[f"dec{i}.ln1.g"])
        grads[f"dec{i}.ln1.g"] += dg
        grads[f"dec{i}.ln1.b"] += db
        dx = dx1 + dxe
    dx = _dropout_backward(dx, emb_keep)
    np.add.at(grads["emb"], tgt_in_ids.ravel(), dx.reshape(-1, d) * np.sqrt(d))
    return denc_out


# ---------------------------------------------------------------------------
# loss

def forward(p, cfg, src_ids, tgt_in_ids, pad_id, drop_rng=None):
    """Full teacher-forced pass. Returns (logits, (enc_cache, dec_cache))."""
    enc_out, src_key_mask, enc_cache = encoder_forward(p, cfg, src_ids, pad_id, drop_rng)
    logits, dec_cache = decoder_forward(p, cfg, tgt_in_ids, enc_out, src_key_mask,
                                        pad_id, drop_rng)
    return logits, (enc_cache, dec_cache)


def cross_entropy(logits, tgt_out_ids, loss_mask):
    """Mean negative log-likelihood over unmasked targets, plus d(loss)/d(logits)."""
    z = logits - logits.max(-1, keepdims=True)
    lse = np.log(np.exp(z).sum(-1, keepdims=True))
    logp = z - lse
    picked = np.take_along_axis(logp, tgt_out_ids[..., None], axis=-1)[..., 0]
    n = int(loss_mask.sum())
    if n == 0:
        raise ValueError("batch contains no target tokens")
    loss = -(picked * loss_mask).sum() / n
    dlogits = np.exp(logp)
    flat = dlogits.reshape(-1, dlogits.shape[-1])
    flat[np.arange(tgt_out_ids.size), tgt_out_ids.ravel()] -= 1.0
    dlogits *= loss_mask[..., None] / n
    return loss, n, dlogits


def loss_and_grads(p, cfg, src_ids, tgt_in_ids, tgt_out_ids, pad_id, drop_rng=None):
    """One teacher-forced step: mean span cross-entropy and all parameter grads."""
    enc_out, src_key_mask, enc_cache = encoder_forward(p, cfg, src_ids, pad_id, drop_rng)
    logits, dec_cache = decoder_forward(p, cfg, tgt_in_ids, enc_out, src_key_mask,
                                        pad_id, drop_rng)
    loss, n, dlogits = cross_entropy(logits, tgt_out_ids, tgt_out_ids != pad_id)
    grads = zero_grads(p)
    denc_out = decoder_backward(p, cfg, dlogits, dec_cache, grads)
    encoder_backward(p, cfg, denc_out, enc_cache, grads)
    return loss, n, grads
