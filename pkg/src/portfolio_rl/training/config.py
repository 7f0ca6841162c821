"""
Training configuration: a flat key=value file validated by pydantic.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..agent import AgentHyperParams
from ..errors import ConfigError
from ..nn import EncoderConfig

_NONE_TOKENS = {"", "none", "null"}


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # learner
    num_workers: int = Field(5, ge=1)
    batch_size: int = Field(32, ge=1)
    lr_actor: float = Field(1e-4, gt=0)
    lr_critic: float = Field(1e-4, gt=0)
    tau: float = Field(0.15, gt=0, le=1)
    gamma: float = Field(0.9, ge=0, le=1)
    rho: float = Field(0.2, ge=0, le=1)
    micro_batch: int = Field(8, ge=1)

    # environment
    window_len: int = Field(50, ge=1)
    max_episode_len: int = Field(50, ge=1)
    initial_cash: float = Field(100_000.0, gt=0)
    fee_rate: float = Field(0.002, ge=0)
    slippage_coefficient: float = Field(0.5, ge=0)
    spread_window: int | None = Field(30, ge=1)
    zero_cost: bool = False
    train_days: int | None = Field(None, ge=2)

    # exploration
    ou_theta: float = Field(0.13, ge=0)
    ou_mu: float = 0.0
    ou_sigma: float = Field(0.2, ge=0)
    ou_dt: float = Field(1.0, gt=0)

    # encoder
    encoder_layers: int = Field(3, ge=1)
    heads: int = Field(8, ge=1)
    model_dim: int = Field(128, ge=1)
    ffn_dim: int = Field(512, ge=1)
    gate_bias: float = 2.0
    relative_attention: bool = True
    gated: bool = True
    time_encoding: bool = True

    # schedule
    seed: int = Field(0, ge=0)
    total_episodes: int = Field(100, ge=0)
    updates_per_episode: int = Field(50, ge=0)
    replay_warmup: int = Field(32, ge=1)
    buffer_capacity: int = Field(100_000, ge=1)
    hmemory_capacity: int = Field(50, ge=1)
    checkpoint_every: int = Field(50, ge=1)
    deterministic: bool = False

    @model_validator(mode="after")
    def _heads_divide_model_dim(self) -> "TrainConfig":
        if self.model_dim % self.heads:
            raise ValueError(f"heads ({self.heads}) must divide model_dim ({self.model_dim})")
        return self

    @property
    def serialized(self) -> bool:
        return self.deterministic or self.num_workers == 1

    @property
    def learner_threshold(self) -> int:
        return max(self.batch_size, self.replay_warmup)

    def encoder_config(self, num_assets: int) -> EncoderConfig:
        """Encoder shape for a dataset with `num_assets` columns (cash included)."""
        return EncoderConfig(
            window_len=self.window_len,
            num_assets=num_assets,
            model_dim=self.model_dim,
            heads=self.heads,
            ffn_dim=self.ffn_dim,
            layers=self.encoder_layers,
            gate_bias=self.gate_bias,
            relative=self.relative_attention,
            gated=self.gated,
            time_encoding=self.time_encoding,
        )

    def agent_params(self) -> AgentHyperParams:
        return AgentHyperParams(
            lr_actor=self.lr_actor,
            lr_critic=self.lr_critic,
            gamma=self.gamma,
            tau=self.tau,
            micro_batch=self.micro_batch,
        )

    def to_text(self) -> str:
        """Canonical key = value form; `load_config` reads it back unchanged."""
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                text = "none"
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        """First 16 hex chars of SHA-256 over the canonical JSON dump."""
        canonical = json.dumps(self.model_dump(), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _field_error(exc: ValidationError) -> ConfigError:
    err = exc.errors()[0]
    key = ".".join(str(p) for p in err.get("loc", ())) or None
    if err.get("type") == "extra_forbidden":
        return ConfigError(f"unknown config key '{key}'", key=key)
    where = f"'{key}'" if key else "config"
    return ConfigError(f"invalid value for {where}: {err.get('msg')}", key=key)


def config_from_mapping(values: dict[str, Any]) -> TrainConfig:
    try:
        return TrainConfig(**values)
    except ValidationError as exc:
        raise _field_error(exc) from None


def parse_config(text: str, source: str = "<config>") -> TrainConfig:
    """Parse `key = value` lines; blank lines and `#` comments are skipped."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value'")
        key, _, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if not key:
            raise ConfigError(f"{source}: line {lineno}: missing key")
        if key in values:
            raise ConfigError(f"{source}: line {lineno}: duplicate key '{key}'", key=key)
        values[key] = None if raw.lower() in _NONE_TOKENS else raw
    return config_from_mapping(values)


def load_config(path: str | os.PathLike) -> TrainConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    return parse_config(text, source=str(p))
