# ---------------------------------------------------------------------
# ohcsvm/settings.py
# ---------------------------------------------------------------------
# Environment-driven runtime settings and logging setup.
#
# Values come from OHCSVM_* environment variables or a .env file in
# the working directory (see .env.example).
# ---------------------------------------------------------------------

import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from ohcsvm.constants_config import LOG_DATEFMT, LOG_FORMAT


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="OHCSVM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "INFO"
    workers: int = Field(default=1, ge=1)
    output_root: Path = Path("output")

    # Model document served by the scoring app
    model_path: Optional[Path] = None

    # Published FE dataset (homogenized or raw CSV schema) for the reference accuracy test
    reference_data: Optional[Path] = None


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def configure_logging(
    level: Union[str, int] = "INFO", log_file: Optional[Path] = None
) -> None:
    """
    Configure the root logger. Module loggers inherit its level.
    Values: DEBUG, INFO, WARNING, ERROR, CRITICAL

    A file handler is added when `log_file` is given; an earlier file
    handler from a previous call is replaced.
    """
    root = logging.getLogger()
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATEFMT)
    root.setLevel(level)

    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        root.addHandler(file_handler)
