"""Centralized logging configuration for kirchhoff-certify."""

import logging
import sys
from datetime import datetime
from config.settings import LOGS_DIR, LOG_LEVEL

# Create logs directory if it doesn't exist
LOG_DIR = LOGS_DIR / "system"
LOG_DIR.mkdir(parents=True, exist_ok=True)

# Log file path with timestamp
LOG_FILE = LOG_DIR / f"kirchhoff_certify_{datetime.now().strftime('%Y%m%d')}.log"


def setup_logger(name: str = "kirchhoff_certify", level: int = logging.DEBUG) -> logging.Logger:
    """
    Set up and return a configured logger.

    Args:
        name: Logger name
        level: Logging level of the logger itself (handlers filter further)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid adding duplicate handlers
    if logger.handlers:
        return logger

    logger.setLevel(level)

    # Console handler - simplified output for user-facing messages
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    console_format = logging.Formatter("%(levelname)s: %(message)s")
    console_handler.setFormatter(console_format)

    # File handler - detailed output for debugging
    file_handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_format = logging.Formatter(
        "%(asctime)s | %(name)s | %(levelname)s | %(funcName)s:%(lineno)d | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    file_handler.setFormatter(file_format)

    logger.addHandler(console_handler)
    logger.addHandler(file_handler)
    _route_warnings(console_handler, file_handler)

    return logger


def _route_warnings(*handlers: logging.Handler) -> None:
    """Send warnings.warn output (numpy RuntimeWarning, scipy sparse and
    integration warnings) through the same handlers as the package loggers."""
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    if warnings_logger.handlers:
        return
    warnings_logger.setLevel(logging.WARNING)
    for handler in handlers:
        warnings_logger.addHandler(handler)


# Create default logger instance
default_logger = setup_logger()
