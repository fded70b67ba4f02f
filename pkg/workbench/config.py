# Runtime configuration settings
# Manages environment variables and workbench-wide knobs
# FAIL-FAST: the CLI will not start with invalid settings

import sys
from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .utils.constants import IOTA_ANNULUS, PRODUCT_CAP, RETURN_CAP

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class Settings(BaseSettings):
    """
    Runtime settings loaded from WORKBENCH_* environment variables or .env.

    Run parameters (seed, threads, output directory) live in the experiment
    config; these are process-wide knobs.

    FAIL-FAST: invalid values stop the CLI with exit code 2.
    """

    # Run
    log_level: str = "INFO"
    record_wall_time: bool = Field(True, description="Write <report>.timing.json sidecars")

    # Caps and chart singularities
    product_cap: int = PRODUCT_CAP
    return_cap: int = RETURN_CAP
    iota_annulus: float = IOTA_ANNULUS

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"WORKBENCH_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
        return level

    @field_validator("product_cap", "return_cap")
    @classmethod
    def validate_cap(cls, v: int) -> int:
        if v < 1:
            raise ValueError("caps must be positive")
        return v

    @field_validator("iota_annulus")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        if not 0.0 < v < 1e-3:
            raise ValueError("WORKBENCH_IOTA_ANNULUS must lie in (0, 1e-3)")
        return v

    model_config = SettingsConfigDict(
        env_prefix="WORKBENCH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


def validate_config_or_exit() -> Settings:
    """
    Validate settings and exit immediately if invalid.
    FAIL-FAST behavior.
    """
    try:
        return Settings()
    except Exception as e:
        print("\n" + "=" * 60, file=sys.stderr)
        print("[ERROR] CONFIGURATION ERROR - workbench cannot start", file=sys.stderr)
        print("=" * 60, file=sys.stderr)
        print(f"\n{e}\n", file=sys.stderr)
        print("Environment overrides use the WORKBENCH_ prefix, e.g.", file=sys.stderr)
        print("  WORKBENCH_LOG_LEVEL=DEBUG  WORKBENCH_RETURN_CAP=100000", file=sys.stderr)
        print("=" * 60 + "\n", file=sys.stderr)
        sys.exit(2)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance with fail-fast validation."""
    return validate_config_or_exit()


def get_settings_dev() -> Optional[Settings]:
    """Get settings without fail-fast (for tests and library use)."""
    try:
        return Settings()
    except Exception:
        return None
