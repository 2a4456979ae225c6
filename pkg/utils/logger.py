#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Centralized logging for osc-detect runs."""

import logging
import logging.handlers
import sys
from collections import deque
from pathlib import Path
from typing import List, Optional

PACKAGE_LOGGERS = ("core", "features", "services", "ui", "utils")
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class InMemoryLogHandler(logging.Handler):
    """Keeps formatted records in memory so they can go into the summary record."""

    def __init__(self, maxlen: int = 1000):
        """
        Initialize the in-memory log handler.

        Args:
            maxlen: Maximum number of log entries to keep in memory
        """
        super().__init__()
        self.logs = deque(maxlen=maxlen)

    def emit(self, record: logging.LogRecord):
        """Emit a log record."""
        try:
            # Handler.handle() already holds the handler lock here
            self.logs.append(self.format(record))
        except (AttributeError, MemoryError):
            self.handleError(record)

    def get_logs(self, lines: Optional[int] = None) -> List[str]:
        """
        Get recent log entries.

        Args:
            lines: Number of recent lines to retrieve (None for all)

        Returns:
            List of log messages
        """
        self.acquire()
        try:
            if lines is None:
                return list(self.logs)
            return list(self.logs)[-lines:]
        finally:
            self.release()

    def clear(self):
        """Clear all stored logs."""
        self.acquire()
        try:
            self.logs.clear()
        finally:
            self.release()


class PipelineLogger:
    """Wires the project loggers to stderr, memory and an optional run log."""

    def __init__(self, level: int = logging.INFO):
        self.level = level
        self.formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        # Diagnostics collected for the summary record
        self.memory_handler = InMemoryLogHandler(maxlen=1000)
        self.memory_handler.setLevel(logging.WARNING)
        self.memory_handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))

        self.stream_handler: Optional[logging.Handler] = None
        self.file_handler: Optional[logging.Handler] = None
        self.log_file_path: Optional[str] = None
        self.logger = logging.getLogger("services")

    def install(self, level: Optional[int] = None, stream=None) -> None:
        """Attach handlers to every project package logger."""
        if level is not None:
            self.level = level
        self.uninstall()
        self.stream_handler = logging.StreamHandler(stream or sys.stderr)
        self.stream_handler.setLevel(self.level)
        self.stream_handler.setFormatter(self.formatter)
        for name in PACKAGE_LOGGERS:
            package_logger = logging.getLogger(name)
            package_logger.setLevel(min(self.level, logging.WARNING))
            package_logger.propagate = False
            package_logger.addHandler(self.stream_handler)
            package_logger.addHandler(self.memory_handler)

    def attach_file(self, out_dir: Path) -> Optional[str]:
        """Add a rotating run log inside the output directory."""
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            log_file = out_dir / "run.log"
            file_handler = logging.handlers.RotatingFileHandler(
                str(log_file),
                maxBytes=10 * 1024 * 1024,  # 10 MB
                backupCount=5,
                encoding="utf-8",
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(self.formatter)
            for name in PACKAGE_LOGGERS:
                logging.getLogger(name).addHandler(file_handler)
            self.file_handler = file_handler
            self.log_file_path = str(log_file)
        except OSError as e:
            # Keep going with stderr and memory logging
            self.logger.warning("Failed to setup file logging: %s", e)
        return self.log_file_path

    def uninstall(self) -> None:
        """Detach the handlers added by install() and attach_file()."""
        for handler in (self.stream_handler, self.memory_handler, self.file_handler):
            if handler is None:
                continue
            for name in PACKAGE_LOGGERS:
                logging.getLogger(name).removeHandler(handler)
        if self.stream_handler is not None:
            for name in PACKAGE_LOGGERS:
                logging.getLogger(name).propagate = True
        if self.file_handler is not None:
            self.file_handler.close()
        self.stream_handler = None
        self.file_handler = None
        self.log_file_path = None

    def get_logs(self, lines: Optional[int] = None) -> List[str]:
        """Diagnostics (WARNING and above) recorded since the last clear."""
        return self.memory_handler.get_logs(lines)

    def clear_logs(self):
        """Clear all stored in-memory logs."""
        self.memory_handler.clear()


# Global instance
pipeline_logger = PipelineLogger()
