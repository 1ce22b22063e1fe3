import logging
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import dotenv_values
from pydantic_settings import BaseSettings, SettingsConfigDict

from tasksampler.schemas import RunConfig

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Settings(BaseSettings):
    """Process-wide settings, read from TASKSAMPLER_* variables and .env."""

    model_config = SettingsConfigDict(env_prefix="TASKSAMPLER_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    output_root: Path = Path("runs")
    enumeration_cap: int = 1_000_000
    workers: int = 1


settings = Settings()


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(format=LOG_FORMAT, level=(level or settings.log_level).upper())


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_run_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Build a RunConfig from an optional key=value file plus overrides.

    Overrides win over file values; keys with a None value are ignored so
    unset CLI flags fall through to the file and then to the defaults.
    """
    values: dict[str, Any] = {}
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        for key, value in dotenv_values(path).items():
            if value is not None and value != "":
                values[_normalize_key(key)] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            values[_normalize_key(key)] = value
    return RunConfig.model_validate(values)
