"""
Runtime settings and logging setup.

Settings come from environment variables (optionally loaded from a .env file);
command-line flags take precedence over them.
"""

import os
import sys
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv
from loguru import logger

from src.errors import ConfigError

ENV_PREFIX = 'MEANSCALE_'
LOG_LEVELS = ('TRACE', 'DEBUG', 'INFO', 'SUCCESS', 'WARNING', 'ERROR', 'CRITICAL')


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults for the CLI and campaigns."""

    log_level: str = 'INFO'
    seed: int = 42
    trials: int = 1000
    workers: int = 1
    p: float = 1.0


def _read(name: str, default: str) -> str:
    return os.environ.get(f'{ENV_PREFIX}{name}', default)


def get_settings(dotenv_path: Optional[str] = None) -> Settings:
    """
    Build settings from the environment.

    Args:
        dotenv_path (str, optional): Explicit .env file; by default python-dotenv
            searches from the working directory upwards.

    Returns:
        Settings: Validated settings.
    """
    load_dotenv(dotenv_path=dotenv_path, override=False)
    try:
        settings = Settings(
            log_level=_read('LOG_LEVEL', 'INFO').upper(),
            seed=int(_read('SEED', '42')),
            trials=int(_read('TRIALS', '1000')),
            workers=int(_read('WORKERS', '1')),
            p=float(_read('P', '1.0')),
        )
    except ValueError as e:
        raise ConfigError(f"Invalid {ENV_PREFIX}* setting: {str(e)}") from e

    if settings.log_level not in LOG_LEVELS:
        raise ConfigError(f"Unknown log level {settings.log_level!r}")
    if settings.trials < 1 or settings.workers < 1:
        raise ConfigError("MEANSCALE_TRIALS and MEANSCALE_WORKERS must be >= 1")
    if not settings.p > 0:
        raise ConfigError("MEANSCALE_P must be positive")
    return settings


def configure_logging(level: str = 'INFO') -> None:
    """Route loguru output to stderr at the given level; stdout stays reserved for reports."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(),
               format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {name}:{function} - {message}")
