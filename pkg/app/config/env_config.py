from dotenv import load_dotenv
import logging
import os

# Load .env variables into environment
_ = load_dotenv()

_LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


def optional_getenv(key: str) -> str | None:
    value = os.getenv(key)
    if value is None or value.strip() == "":
        return None
    return value.strip()


class Config:
    """Process environment; read at construction so tests can patch os.environ."""

    def __init__(self):
        self.OUTPUT_DIR: str | None = optional_getenv("NCOOD_OUTPUT_DIR")
        level = (optional_getenv("NCOOD_LOG_LEVEL") or "INFO").upper()
        if level not in _LOG_LEVELS:
            raise EnvironmentError(f"NCOOD_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}, got {level}")
        self.LOG_LEVEL: str = level

    @property
    def log_level(self) -> int:
        return getattr(logging, self.LOG_LEVEL)
