"""
Application settings using Pydantic BaseSettings.
"""

from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = "PGAS Molecular Dynamics Bench"
    debug: bool = False
    log_level: str = "INFO"

    # Output locations
    results_dir: str = "results"
    session_log_dir: Optional[str] = None

    # All-pairs oracle guard
    oracle_max_molecules: int = 5000

    # Cell storage: capacity = max(min_cell_capacity, margin * mean occupancy)
    min_cell_capacity: int = 32
    cell_capacity_margin: float = 4.0

    # Collectives
    barrier_timeout_s: float = 600.0

    # HTTP surface
    api_max_steps: int = 1000


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
