"""Deterministic binary checkpoint container.

Layout: an 8-byte magic, an 8-byte little-endian header length, a canonical
JSON header (config, vocabulary hash, parameter manifest) and the raw
little-endian float64 parameter bytes in manifest order. No timestamps and
no pickle, so identical models always serialize to identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from requery.corpus import Vocabulary
from requery.errors import VocabMismatch
from requery.model.config import ModelConfig
from requery.model.core import InfillModel

MAGIC = b"RQMODEL1"
FORMAT_VERSION = 1


def save_checkpoint(model: InfillModel, path: str | Path) -> None:
    names = list(model.params)
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "vocab_sha256": model.vocab.sha256(),
        "params": [{"name": n, "shape": list(model.params[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(model.params[n], dtype="<f8").tobytes())


def load_checkpoint(path: str | Path, vocab: Vocabulary) -> InfillModel:
    """Rebuild a model, refusing to load against the wrong vocabulary."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path} is not a model checkpoint")
    header_len = int.from_bytes(raw[8:16], "little")
    header = json.loads(raw[16:16 + header_len].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version in {path}")
    if header["vocab_sha256"] != vocab.sha256():
        raise VocabMismatch(
            f"checkpoint was trained against a different vocabulary "
            f"({header['vocab_sha256'][:12]}... != {vocab.sha256()[:12]}...)")
    config = ModelConfig.from_dict(header["config"])
    params = {}
    offset = 16 + header_len
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        params[entry["name"]] = arr.reshape(shape).astype(np.float64)
        offset += count * 8
    return InfillModel(config, vocab, params)
