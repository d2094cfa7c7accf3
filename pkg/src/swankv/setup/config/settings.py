import logging
import os
from pathlib import Path
from typing import Any

import rtoml
from pydantic import BaseModel, Field, field_validator

from swankv.domain.enums.precision import Precision
from swankv.domain.enums.projection_variant import ProjectionVariant
from swankv.setup.config.constants import (
    DEFAULT_ENV,
    ENV_TO_DIR_PATHS,
    ENV_VAR_NAME,
    THREADS_VAR_NAME,
    DirContents,
    ValidEnvs,
)
from swankv.setup.config.logs import DEFAULT_LOG_LEVEL, LoggingLevel

log = logging.getLogger(__name__)


# PYDANTIC MODELS


class ModelSettings(BaseModel):
    d_model: int = Field(default=64, alias="D_MODEL")
    d_head: int = Field(default=16, alias="D_HEAD")
    layers: int = Field(default=2, alias="LAYERS")
    q_heads: int = Field(default=4, alias="Q_HEADS")
    kv_heads: int = Field(default=2, alias="KV_HEADS")
    theta_base: float = Field(default=10000.0, alias="THETA_BASE")
    vocab_size: int = Field(default=256, alias="VOCAB_SIZE")
    seed: int = Field(default=0, alias="SEED")


class CalibrationSettings(BaseModel):
    tokens: int = Field(default=4096, alias="TOKENS")
    heldout_tokens: int = Field(default=512, alias="HELDOUT_TOKENS")
    corpus: Path | None = Field(default=None, alias="CORPUS")
    variant: ProjectionVariant = Field(
        default=ProjectionVariant.LEARNED,
        alias="VARIANT",
    )

    @field_validator("tokens", "heldout_tokens")
    @classmethod
    def validate_token_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Token counts must be at least 1.")
        return v


class CacheSettings(BaseModel):
    k_ratio: float = Field(default=0.5, alias="K_RATIO")
    buffer: int = Field(default=16, alias="BUFFER")
    precision: Precision = Field(default=Precision.FP16, alias="PRECISION")

    @field_validator("k_ratio")
    @classmethod
    def validate_k_ratio(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError("K_RATIO must lie in [0, 1].")
        return v

    @field_validator("buffer")
    @classmethod
    def validate_buffer(cls, v: int) -> int:
        if v < 0:
            raise ValueError("BUFFER must be >= 0.")
        return v


class RuntimeSettings(BaseModel):
    prompt_length: int = Field(default=32, alias="PROMPT_LENGTH")
    steps: int = Field(default=32, alias="STEPS")
    seeds: int = Field(default=5, alias="SEEDS")
    retentions: tuple[float, ...] = Field(
        default=(1.0, 0.9, 0.75, 0.5, 0.3),
        alias="RETENTIONS",
    )
    buffers: tuple[int, ...] = Field(default=(0, 16), alias="BUFFERS")


class ParallelismSettings(BaseModel):
    threads: int = Field(default=1, alias="THREADS", validate_default=True)

    @field_validator("threads")
    @classmethod
    def override_threads_from_env(cls, v: int) -> int:
        threads_env = os.environ.get(THREADS_VAR_NAME)
        if threads_env:
            try:
                v = int(threads_env)
            except ValueError as e:
                raise ValueError(f"{THREADS_VAR_NAME} must be an integer.") from e
        if v < 1:
            raise ValueError("Thread count must be at least 1.")
        return v


class LoggingSettings(BaseModel):
    level: LoggingLevel = Field(default=DEFAULT_LOG_LEVEL, alias="LEVEL")


class AppSettings(BaseModel):
    model: ModelSettings = Field(default_factory=ModelSettings)
    calibration: CalibrationSettings = Field(default_factory=CalibrationSettings)
    cache: CacheSettings = Field(default_factory=CacheSettings)
    runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)
    parallelism: ParallelismSettings = Field(default_factory=ParallelismSettings)
    logs: LoggingSettings = Field(default_factory=LoggingSettings)


# ENVIRONMENT VALIDATION


def validate_env(*, env: str | None) -> ValidEnvs:
    if env is None:
        return DEFAULT_ENV
    try:
        return ValidEnvs(env)
    except ValueError as e:
        valid_values = ", ".join(f"'{e}'" for e in ValidEnvs)
        raise ValueError(
            f"Invalid {ENV_VAR_NAME}: '{env}'. Must be one of: {valid_values}.",
        ) from e


def get_current_env() -> ValidEnvs:
    env_value = os.getenv(ENV_VAR_NAME)
    return validate_env(env=env_value)


# CONFIG READING


def read_config(
    *,
    env: ValidEnvs,
    config: DirContents = DirContents.CONFIG_NAME,
) -> dict[str, Any]:
    dir_path = ENV_TO_DIR_PATHS.get(env)
    if dir_path is None:
        raise FileNotFoundError(f"No directory path configured for environment: {env}")
    file_path = dir_path / config
    if not file_path.is_file():
        raise FileNotFoundError(
            f"The file does not exist at the specified path: {file_path}",
        )
    with open(file=file_path, mode="r", encoding="utf-8") as file:
        return rtoml.load(file)


def merge_dicts(*, dict1: dict[str, Any], dict2: dict[str, Any]) -> dict[str, Any]:
    result = dict1.copy()
    for key, value in dict2.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_dicts(dict1=result[key], dict2=value)
        else:
            result[key] = value
    return result


def load_full_config(*, env: ValidEnvs) -> dict[str, Any]:
    log.debug("Reading config for environment: '%s'", env)
    try:
        config = read_config(env=env)
    except FileNotFoundError:
        log.warning("Config file for '%s' not found. Using built-in defaults.", env)
        return {}
    try:
        secrets = read_config(env=env, config=DirContents.SECRETS_NAME)
    except FileNotFoundError:
        log.debug("No secrets file for '%s'.", env)
    else:
        config = merge_dicts(dict1=config, dict2=secrets)
    return config


# PUBLIC INTERFACE


def load_settings(env: ValidEnvs | None = None) -> AppSettings:
    if env is None:
        env = get_current_env()
    raw_config = load_full_config(env=env)
    return AppSettings.model_validate(raw_config)
