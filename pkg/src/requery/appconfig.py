"""YAML configuration for the CLI and the HTTP service.

Every key has a default; a config file only overrides what it names. Path
keys are resolved relative to the config file's directory so a project
directory stays relocatable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from requery.errors import ConfigError
from requery.expand import ExpanderConfig, Strategy
from requery.model.config import ModelConfig, TrainConfig, DEFAULT_SEED


@dataclass
class Paths:
    query_corpus: Path = Path("data/queries.jsonl")
    search_corpus: Path = Path("data/documents.jsonl")
    eval_cases: Path = Path("data/cases.jsonl")
    vocab: Path = Path("out/vocab.json")
    checkpoint: Path = Path("out/model.ckpt")
    index: Path = Path("out/index.json")
    train_report: Path = Path("out/train_report.json")
    eval_report: Path = Path("out/eval_report.jsonl")


@dataclass
class EngineParams:
    k1: float = 1.2
    b: float = 0.75
    top_n: int = 100


@dataclass
class ServiceParams:
    host: str = "127.0.0.1"
    port: int = 8000
    ui_dir: Path | None = None


@dataclass
class VocabParams:
    max_size: int = 20_000
    min_freq: int = 2


@dataclass
class AppConfig:
    seed: int = DEFAULT_SEED            # pipeline seed (corruption, shuffling, RAND)
    use_first: int = 3                  # reformulations searched per query
    paths: Paths = field(default_factory=Paths)
    vocab: VocabParams = field(default_factory=VocabParams)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    expander: ExpanderConfig = field(default_factory=ExpanderConfig)
    engine: EngineParams = field(default_factory=EngineParams)
    service: ServiceParams = field(default_factory=ServiceParams)


def _build(cls, data: dict, where: str):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    return cls(**data)


def load_config(path: str | Path | None) -> AppConfig:
    """Load a YAML config file; None yields pure defaults."""
    if path is None:
        return AppConfig()
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = Path(path).resolve().parent

    # note: base / "relative" rebases, base / "/absolute" is a no-op
    paths_data = {k: Path(v) for k, v in raw.pop("paths", {}).items()}
    service_data = raw.pop("service", {})
    if service_data.get("ui_dir"):
        service_data["ui_dir"] = base / service_data["ui_dir"]
    expander_data = raw.pop("expander", {})
    if "strategy" in expander_data:
        try:
            expander_data["strategy"] = Strategy(str(expander_data["strategy"]).upper())
        except ValueError:
            raise ConfigError(f"unknown strategy {expander_data['strategy']!r}; "
                              f"choose from {[s.value for s in Strategy]}") from None

    cfg = AppConfig(
        seed=int(raw.pop("seed", DEFAULT_SEED)),
        use_first=int(raw.pop("use_first", 3)),
        paths=_build(Paths, paths_data, "paths"),
        vocab=_build(VocabParams, raw.pop("vocab", {}), "vocab"),
        model=_build(ModelConfig, raw.pop("model", {}), "model"),
        train=_build(TrainConfig, raw.pop("train", {}), "train"),
        expander=_build(ExpanderConfig, expander_data, "expander"),
        engine=_build(EngineParams, raw.pop("engine", {}), "engine"),
        service=_build(ServiceParams, service_data, "service"),
    )
    if raw:
        raise ConfigError(f"unknown top-level key(s) in {path}: {sorted(raw)}")
    for name in Paths.__dataclass_fields__:
        setattr(cfg.paths, name, base / getattr(cfg.paths, name))
    return cfg


def require(path: Path, what: str) -> Path:
    if not Path(path).exists():
        raise ConfigError(f"{what} not found: {path} (run the earlier pipeline stages?)")
    return Path(path)
