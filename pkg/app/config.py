from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings from environment variables (TUNE_*) and .env."""

    model_config = SettingsConfigDict(
        env_prefix="TUNE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    debug: bool = Field(default=False)

    # Default parallelism for kernel batches, grid optimization and validation
    jobs: int = Field(default=1, ge=1)

    # Root directory for run outputs when a config does not name one
    runs_dir: Path = Field(default=Path("./runs"))


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
