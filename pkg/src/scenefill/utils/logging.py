from __future__ import annotations

import logging
import sys

from scenefill.config import settings


ROOT = "scenefill"


def get_logger(name: str) -> logging.Logger:
    """Loggers share one stderr handler on the package root so stdout stays free for reports."""
    root = logging.getLogger(ROOT)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        fmt = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        handler.setFormatter(fmt)
        root.addHandler(handler)
        root.setLevel(settings.LOG_LEVEL.upper())
    if not name.startswith(ROOT):
        name = f"{ROOT}.{name}"
    return logging.getLogger(name)


def set_level(level: str | int) -> None:
    if isinstance(level, str):
        level = level.upper()
    get_logger(ROOT)
    logging.getLogger(ROOT).setLevel(level)
