"""Model object tying a parameter dict to its config and vocabulary."""

from __future__ import annotations

import numpy as np

from requery.corpus import Vocabulary
from requery.model.config import ModelConfig
from requery.model import transformer


class InfillModel:
    """A span-infill transformer bound to one vocabulary.

    Parameters live in a flat name->array dict (see transformer.init_params
    for the layout). Training mutates them in place and needs exclusive
    access; a trained model is otherwise read-only and safe to share.
    """

    def __init__(self, config: ModelConfig, vocab: Vocabulary,
                 params: dict[str, np.ndarray] | None = None):
        self.config = config
        self.vocab = vocab
        self.params = params if params is not None else transformer.init_params(config, vocab.size)

    def encode_source(self, src_ids: np.ndarray):
        """Run the encoder once; returns (enc_out, src_key_mask)."""
        enc_out, key_mask, _ = transformer.encoder_forward(
            self.params, self.config, src_ids, self.vocab.pad_id)
        return enc_out, key_mask

    def next_token_distribution(self, prefix_ids: np.ndarray, enc_out, src_key_mask):
        """Distribution over the vocabulary for the step after *prefix_ids*."""
        logits, _ = transformer.decoder_forward(
            self.params, self.config, prefix_ids, enc_out, src_key_mask, self.vocab.pad_id)
        return transformer.softmax(logits[:, -1, :])


def init_model(config: ModelConfig, vocab: Vocabulary) -> InfillModel:
    """Deterministically initialized model; equal inputs give identical params."""
    return InfillModel(config, vocab)
