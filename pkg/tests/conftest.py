"""Shared fixtures. Trained models are session-scoped: training is cheap
but not free, and a trained model is read-only, so reuse is safe."""

import numpy as np
import pytest

from requery.corpus import build_vocabulary
from requery.corruption import make_training_pairs
from requery.model import InfillModel, ModelConfig, TrainConfig, train

TOY_SEED = 5


def toy_queries(n=50, vocab_words=40, seed=TOY_SEED):
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(vocab_words)]
    return [[words[rng.integers(vocab_words)] for _ in range(int(rng.integers(4, 9)))]
            for _ in range(n)]


@pytest.fixture(scope="session")
def toy_setup():
    """A small corpus plus a model overfit on one fixed corruption per query."""
    queries = toy_queries()
    vocab = build_vocabulary(queries, max_size=1000, min_freq=1)
    samples = make_training_pairs(queries, np.random.default_rng(11))
    model = InfillModel(ModelConfig(embed_dim=64, layers=2, heads=4,
                                    feedforward_dim=128, seed=101), vocab)
    train(model, samples, TrainConfig(epochs=120, batch_size=32,
                                      learning_rate=1e-3, optimizer="adam"))
    return {"queries": queries, "vocab": vocab, "samples": samples, "model": model}
