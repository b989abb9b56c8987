"""
Logging configuration for hedgegraph

Three console styles (plain, emoji/ANSI and one JSON object per line) chosen by
``LOG_FORMAT``; ``HEDGEGRAPH_NO_EMOJI`` strips decorations. Handlers write to
standard error because command summaries own standard output.
"""

import json
import logging
import logging.handlers
import sys
from datetime import datetime, timezone
from enum import Enum

from .config.settings import get_settings

settings = get_settings()

# Attributes every LogRecord has; anything else came in through ``extra=``
_STANDARD_ATTRS = frozenset(vars(logging.makeLogRecord({}))) | {"message", "asctime"}

_LOG_FILE_BYTES = 5 * 1024 * 1024
_LOG_FILE_BACKUPS = 3


class LogFormat(str, Enum):
    """Supported console styles"""

    PLAIN = "plain"
    EMOJI = "emoji"
    JSON = "json"

    @classmethod
    def resolve(cls, raw: str | None) -> "LogFormat":
        try:
            return cls((raw or "").strip().lower())
        except ValueError:
            return cls.EMOJI


class HedgeGraphFormatter(logging.Formatter):
    """Formatter for all hedgegraph handlers"""

    COLORS = {
        "DEBUG": "\033[2m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[1;31m",
    }
    RESET = "\033[0m"

    EMOJIS = {
        "DEBUG": "🔍",
        "INFO": "📈",
        "WARNING": "⚠️",
        "ERROR": "❌",
        "CRITICAL": "🛑",
    }

    TEXT_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
    DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

    def __init__(self, log_format: LogFormat = LogFormat.EMOJI, use_emoji: bool = True):
        super().__init__(self.TEXT_FORMAT, self.DATE_FORMAT)
        self.log_format = log_format
        self.use_emoji = use_emoji and log_format == LogFormat.EMOJI

    def format(self, record: logging.LogRecord) -> str:
        if self.log_format == LogFormat.JSON:
            return self._format_json(record)
        line = super().format(record)
        if not self.use_emoji:
            return line
        color = self.COLORS.get(record.levelname, "")
        emoji = self.EMOJIS.get(record.levelname, "")
        return f"{color}{emoji} {line}{self.RESET}"

    def _format_json(self, record: logging.LogRecord) -> str:
        entry = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat(
                timespec="milliseconds"
            ),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        entry.update(
            (key, value) for key, value in vars(record).items() if key not in _STANDARD_ATTRS
        )
        return json.dumps(entry, default=str)


def setup_logging(level: str | None = None) -> None:
    """
    Configure the root logger from settings.

    ``level`` overrides ``LOG_LEVEL`` (the CLI passes DEBUG for ``--verbose``).
    ``LOG_FILE`` adds a rotating file handler with the same formatter.
    """
    log_level = logging.getLevelName((level or settings.LOG_LEVEL).upper())
    if not isinstance(log_level, int):
        log_level = logging.INFO

    log_format = LogFormat.resolve(settings.LOG_FORMAT)
    formatter = HedgeGraphFormatter(log_format, use_emoji=not settings.HEDGEGRAPH_NO_EMOJI)

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.LOG_FILE:
        handlers.append(
            logging.handlers.RotatingFileHandler(
                settings.LOG_FILE, maxBytes=_LOG_FILE_BYTES, backupCount=_LOG_FILE_BACKUPS
            )
        )

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(log_level)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Named logger; configures the root logger on first use."""
    if not logging.getLogger().handlers:
        setup_logging()
    return logging.getLogger(name)
