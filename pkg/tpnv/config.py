"""Runtime configuration loaded from the environment."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Resource limits and tuning knobs.

    Every field can be set through a ``TPNV_`` prefixed environment variable
    or a ``.env`` file, e.g. ``TPNV_MAX_REGIONS=500000``.
    """

    model_config = SettingsConfigDict(
        env_prefix="TPNV_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    max_cover_nodes: int = Field(default=50_000, gt=0, description="Node cap for coverability graphs")
    max_tree_nodes: int = Field(default=100_000, gt=0, description="Node cap for region Karp-Miller trees")
    max_regions: int = Field(default=200_000, gt=0, description="Regions processed by one backward fixpoint")
    solver_timeout_ms: int = Field(default=60_000, gt=0, description="z3 timeout per cycle system")
    gallop_limit: int = Field(default=65_536, gt=0, description="Largest coordinate tried when minimizing")
    jobs: int = Field(default=1, gt=0, description="Worker threads for independent subproblems")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"


_active: Settings | None = None


@lru_cache(maxsize=1)
def _environment_settings() -> Settings:
    return Settings()


def load_settings(env_file: Path | None) -> Settings:
    """Load settings from an explicit ``.env`` file and make them process-wide.

    Args:
        env_file: Path to the file, or None to read the environment only.

    Returns:
        The loaded settings.
    """
    global _active
    _active = Settings(_env_file=env_file)  # type: ignore[call-arg]
    return _active


def get_settings(settings: Settings | None = None) -> Settings:
    """Resolve the settings an analysis should use.

    Args:
        settings: Explicit settings passed by the caller; they win.

    Returns:
        The explicit settings, else those installed by ``load_settings``,
        else the environment defaults.
    """
    if settings is not None:
        return settings
    if _active is not None:
        return _active
    return _environment_settings()
