"""Configuration management for the Lola stream monitor."""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

_REPO_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="LOLA_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application Settings
    app_name: str = "Lola Stream Monitor"
    app_version: str = "1.0.0"
    debug: bool = Field(default=False, description="Enable debug mode")

    # Logging
    log_level: str = Field(default="WARNING", description="Console log level")
    log_file: Optional[str] = Field(default=None, description="Optional rotating log file")

    # Frontend Settings
    max_expansion_depth: int = Field(
        default=10_000, ge=1, description="Template instantiations allowed per output stream"
    )
    include_stdlib: bool = Field(
        default=True, description="Preload the ltl_past, mtl, mtltl and utils bundles"
    )
    lib_dir: str = Field(default=str(_REPO_ROOT / "lib"), description="Library bundle directory")

    # Engine Settings
    simplify: bool = Field(default=True, description="Use simplifiers for anticipation")
    queue_size: int = Field(default=1024, ge=1, description="Reader to engine queue bound")

    # Experiments
    experiment_seed: int = Field(default=7, description="Seed for synthetic traces")


# Global settings instance
settings = Settings()
