"""
Configuration Management for frustration-lab

Handles environment variables, solver caps, sampling and output settings.
"""

from typing import Optional

try:
    from pydantic_settings import BaseSettings, SettingsConfigDict
    from pydantic import Field
except ImportError:
    raise ImportError("Please install pydantic-settings: pip install pydantic-settings")


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Application settings
    app_name: str = "frustration-lab"
    app_version: str = "0.1.0"

    # Parallelism and randomness
    threads: int = Field(default=1, description="Worker processes for parallel backends")
    seed: int = Field(default=0, description="Master seed used when a run does not pass one")

    # Ground-state backend caps
    exhaustive_max_sites: int = Field(default=30)
    auto_exhaustive_max_sites: int = Field(default=25)
    branch_and_bound_max_sites: int = Field(default=64)
    transfer_max_width: int = Field(default=14)
    exhaustive_chunk_bits: int = Field(default=16)  # low spins vectorised per block
    max_collected_states: int = Field(default=100_000)

    # Monte Carlo
    mc_batch_size: int = Field(default=250_000)

    # Output
    float_precision_digits: int = Field(default=4)

    # Logging
    log_level: str = Field(default="INFO")
    log_file: Optional[str] = Field(default=None)

    model_config = SettingsConfigDict(
        env_prefix="FRUSTRATION_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # Ignore extra fields from .env file
    )


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get application settings."""
    return settings


def validate_settings(config: Optional[Settings] = None) -> None:
    """Validate that caps and worker counts are usable."""
    config = config or settings
    issues = []

    if config.threads < 1:
        issues.append("FRUSTRATION_LAB_THREADS must be at least 1")

    for name in (
        "exhaustive_max_sites",
        "auto_exhaustive_max_sites",
        "branch_and_bound_max_sites",
        "transfer_max_width",
        "exhaustive_chunk_bits",
        "max_collected_states",
        "mc_batch_size",
    ):
        if getattr(config, name) < 1:
            issues.append(f"{name} must be positive (got {getattr(config, name)})")

    if config.auto_exhaustive_max_sites > config.exhaustive_max_sites:
        issues.append("auto_exhaustive_max_sites cannot exceed exhaustive_max_sites")

    if issues:
        raise ValueError("Configuration issues:\n" + "\n".join(f"- {issue}" for issue in issues))

