"""Trainable span-infill model: config, transformer core, training, decoding."""

from requery.model.config import ModelConfig, TrainConfig, TrainReport, DEFAULT_SEED
from requery.model.core import InfillModel, init_model
from requery.model.infill import SpanPrediction, infill
from requery.model.train import train, train_on_corpus
from requery.model.checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "ModelConfig", "TrainConfig", "TrainReport", "DEFAULT_SEED",
    "InfillModel", "init_model",
    "SpanPrediction", "infill",
    "train", "train_on_corpus",
    "save_checkpoint", "load_checkpoint",
]
