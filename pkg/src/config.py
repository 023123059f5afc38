"""Centralized configuration. Reads from .env file and supports runtime overrides."""

import logging
import os
from pathlib import Path

from dotenv import load_dotenv

from src.errors import ConfigError

# Load .env from project root
_env_path = Path(__file__).resolve().parent.parent / ".env"
load_dotenv(_env_path)

# --- Defaults from .env ---
CCV_LOG_LEVEL = os.getenv("CCV_LOG_LEVEL", "WARNING")
CCV_THREADS = os.getenv("CCV_THREADS", "1")
CCV_OUTPUT_DIR = os.getenv("CCV_OUTPUT_DIR", "output")
CCV_ACCEPTANCE = os.getenv("CCV_ACCEPTANCE", "0")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def get_setting(name: str) -> str:
    """Get a setting, checking os.environ first (picks up runtime overrides)."""
    return os.environ.get(name, globals().get(name, ""))


def get_int_setting(name: str, minimum: int | None = None) -> int:
    raw = get_setting(name)
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def get_bool_setting(name: str) -> bool:
    raw = get_setting(name).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("", "0", "false", "no", "off"):
        return False
    raise ConfigError(f"{name} must be a boolean flag, got {raw!r}")


def configure_logging(level: str | None = None) -> logging.Logger:
    """Attach a single stream handler to the package logger.

    Library modules only call logging.getLogger(__name__); this is the one
    place a handler is installed, and calling it twice is harmless.
    """
    level_name = (level or get_setting("CCV_LOG_LEVEL") or "WARNING").upper()
    if not isinstance(logging.getLevelName(level_name), int):
        raise ConfigError(f"Unknown log level {level_name!r}")

    root = logging.getLogger("src")
    root.setLevel(level_name)
    if not any(getattr(h, "_ccv_handler", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._ccv_handler = True
        root.addHandler(handler)
    return root
