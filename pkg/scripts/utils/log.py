#!/usr/bin/env python3
"""Bracket-tagged loggers: every message prints as `[Tag] message`"""

import logging
import sys

ROOT_LOGGER = "microgrid"

_FORMAT = "[%(tag)s] %(message)s"


class _TagFilter(logging.Filter):
    """Expose the last component of the logger name as %(tag)s"""

    def filter(self, record: logging.LogRecord) -> bool:
        record.tag = record.name.rsplit(".", 1)[-1]
        return True


def get_logger(tag: str) -> logging.Logger:
    """Return the logger for a component tag, e.g. get_logger("Env")"""
    return logging.getLogger(f"{ROOT_LOGGER}.{tag}")


def configure_logging(level: int = logging.INFO) -> None:
    """Attach one stderr handler to the package root logger (idempotent)"""
    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel(level)
    if not any(getattr(h, "_microgrid", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_TagFilter())
        handler._microgrid = True
        root.addHandler(handler)
    root.propagate = False
