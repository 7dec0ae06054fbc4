"""Logging setup backed by rich."""
import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from src.config import LOG_LEVEL

_CONFIGURED = False


def configure_logging(level: Optional[str] = None, console: Optional[Console] = None) -> None:
    """Install a RichHandler on the package logger.

    Args:
        level: Level name; defaults to the EDL_LOG environment variable
        console: Console to log to (stderr console if omitted)
    """
    global _CONFIGURED
    logger = logging.getLogger("edl")
    logger.setLevel((level or LOG_LEVEL).upper())
    if _CONFIGURED:
        return
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    _CONFIGURED = True


def get_logger(name: str) -> logging.Logger:
    """Get a child of the package logger for a module name."""
    short = name.split(".", 1)[1] if name.startswith("src.") else name
    return logging.getLogger(f"edl.{short}")
