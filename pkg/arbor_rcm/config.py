"""Configuration management for arbor-rcm."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Documented default seed; every command is reproducible unless --seed overrides it.
DEFAULT_SEED = 20060101


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables (prefix ARBOR_RCM_)."""

    model_config = SettingsConfigDict(
        env_prefix="ARBOR_RCM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Execution
    threads: int = Field(default=1, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    log_level: str = Field(default="INFO")
    format: str = Field(default="csv")

    # Numerical tolerances
    value_tol: float = Field(default=1e-10, gt=0)
    critical_tol: float = Field(default=1e-8, gt=0)

    # Guards
    enumeration_guard: int = Field(default=24)  # edges, i.e. 2**24 configurations
    node_guard: int = Field(default=10**8)


@lru_cache
def get_settings() -> Settings:
    return Settings()
