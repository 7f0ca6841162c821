"""
Environment-configurable process settings.
"""

from __future__ import annotations

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Process-level knobs that do not change training semantics."""

    model_config = SettingsConfigDict(env_prefix="PRL_", env_file=".env", extra="ignore")

    log_level: str = Field("INFO", description="Loguru level for the stderr sink")
    log_file: str | None = Field(None, description="Optional rotating log file")
    metrics_port: int | None = Field(None, description="Serve Prometheus metrics on this port")
    trace_steps: bool = Field(False, description="Write per-step environment trace CSVs")


@lru_cache()
def get_settings() -> RuntimeSettings:
    return RuntimeSettings()
