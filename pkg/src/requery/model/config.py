"""Model and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

from requery.errors import ConfigError

DEFAULT_SEED = 101


@dataclass(frozen=True)
class ModelConfig:
    """Shape of the infill transformer.

    Defaults are deliberately small: the point of the artifact is the
    training objective and the selection rule, not backbone scale, and a
    desk-scale corpus must train in minutes on a CPU.
    """

    embed_dim: int = 128
    layers: int = 2          # encoder layers; the decoder uses the same count
    heads: int = 4
    feedforward_dim: int = 256
    max_input_len: int = 128
    dropout: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in ("embed_dim", "layers", "heads", "feedforward_dim", "max_input_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.embed_dim % self.heads != 0:
            raise ConfigError(
                f"embed_dim ({self.embed_dim}) must be divisible by heads ({self.heads})")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings. Plain SGD by default; "adam" is available for
    runs where convergence speed matters more than simplicity."""

    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 1e-3
    grad_clip: float | None = None
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ConfigError(f"grad_clip must be positive, got {self.grad_clip}")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainReport:
    """Per-epoch mean cross-entropy (nats per target token) and step count."""

    per_epoch_loss: list[float] = field(default_factory=list)
    steps: int = 0

    def to_dict(self) -> dict:
        return {"per_epoch_loss": self.per_epoch_loss, "steps": self.steps}
