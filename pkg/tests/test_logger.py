"""Tests for the logging setup."""

import logging
import os

from core.logger import LOG_FILE, setup_logger


class TestSetupLogger:
    """Tests for setup_logger."""

    def test_reuses_handlers(self):
        """A second call returns the same logger without new handlers."""
        first = setup_logger("kirchhoff_certify_test")
        count = len(first.handlers)
        assert setup_logger("kirchhoff_certify_test") is first
        assert len(first.handlers) == count == 2

    def test_warnings_reach_the_log_file(self):
        """Library warnings are captured into the package log file."""
        setup_logger("kirchhoff_certify_test_warnings")
        handlers = logging.getLogger("py.warnings").handlers
        assert any(isinstance(h, logging.FileHandler) and h.baseFilename == os.path.abspath(LOG_FILE) for h in handlers)
