from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    EXTENSION: str = ".java"
    FOLD_COUNT: int = Field(default=10, ge=2)
    TEST_FOLD: int = Field(default=0, ge=0)
    SEED: int = 13
    MODEL_PATH: str = "model.cgru"
    PER_PROJECT_SPLIT: bool = True
    SUGGEST_K: int = Field(default=5, ge=1)
    GENERATE_MAX_STEPS: int = Field(default=20, ge=1)
    COMPILER_COMMAND: str | None = None

    model_config = SettingsConfigDict(env_prefix="CODELM_", env_file=".env", extra="ignore")


class TrainConfig(BaseModel):
    """Hyperparameters of one training run; also stored in the model container."""

    n: int = Field(default=20, ge=1)
    batch_size: int = Field(default=512, ge=1)
    epochs: int = Field(default=100, ge=0)
    learning_rate: float = Field(default=0.001, gt=0)
    dropout_rate: float = Field(default=0.2, ge=0.0, lt=1.0)
    embed_dim: int = Field(default=300, ge=1)
    hidden_dim: int = Field(default=300, ge=1)
    cell_kind: Literal["rnn", "gru"] = "gru"
    context_mode: Literal["variable", "fixed"] = "variable"
    token_mode: Literal["regularized", "raw"] = "regularized"
    reset_per_line: bool = False
    use_bias: bool = True
    workers: int = Field(default=1, ge=1)
    seed: int = 13

    model_config = ConfigDict(extra="forbid")


def build_train_config(**values: Any) -> TrainConfig:
    try:
        return TrainConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"invalid training config: {exc}") from exc


def load_train_config(path: str | Path | None = None, **overrides: Any) -> TrainConfig:
    """Defaults < key=value config file < explicit overrides (None values are ignored)."""

    values: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} not found")
        for key, raw in dotenv_values(p).items():
            values[key.strip().lower()] = raw
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return build_train_config(**values)


settings = Settings()
