from __future__ import annotations

import datetime as _dt
import json
import logging
import logging.handlers
import os
import traceback
from typing import Any, Dict, Optional

_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
_DATEFMT = '%Y-%m-%dT%H:%M:%SZ'


def _level_from_env() -> int:
    if os.getenv('DEBUG'):
        return logging.DEBUG
    name = os.getenv('LOG_LEVEL', 'INFO').upper()
    return getattr(logging, name, logging.INFO)


def get_logger(name: str = 'posipath', level: Optional[int] = None) -> logging.Logger:
    """Get a configured logger with rotation and proper formatting.

    Args:
        name: Logger name (default: 'posipath')
        level: Log level override (default: DEBUG if DEBUG env var, else LOG_LEVEL or INFO)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid duplicate handlers if logger already configured
    if logger.handlers:
        return logger

    logger.setLevel(level if level is not None else _level_from_env())
    logger.propagate = False

    formatter = logging.Formatter(_FORMAT, datefmt=_DATEFMT)

    try:
        from posipath.core.paths import get_logs_dir
        log_path = os.path.join(str(get_logs_dir()), 'posipath.log')
        file_handler = logging.handlers.RotatingFileHandler(
            log_path,
            maxBytes=5 * 1024 * 1024,
            backupCount=3,
            encoding='utf-8',
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError:
        # Read-only checkout: keep going without a file sink
        logger.addHandler(logging.NullHandler())

    if os.getenv('DEBUG'):
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def log_event(event: str, message: str, level: int = logging.INFO) -> None:
    """Log an event with the specified level.

    Args:
        event: Event identifier (e.g., 'ROUTE', 'CZ_INDEX')
        message: Log message
        level: Log level (default: INFO)
    """
    try:
        get_logger().log(level, f"[{event}] {message}")
    except Exception:
        pass


def log_exception(event: str, exc: BaseException, level: int = logging.ERROR) -> None:
    """Log an exception with full traceback."""
    try:
        tb = traceback.format_exc()
        get_logger().log(level, f"[{event}] Exception: {exc}\n{tb}")
    except Exception:
        pass


def log_json(event: str, message: str, **kwargs: Any) -> None:
    """Log structured JSON data.

    Args:
        event: Event identifier
        message: Log message
        **kwargs: Additional structured data to include
    """
    try:
        data = {"timestamp": _now(), "event": event, "type": "event", "message": message, **kwargs}
        get_logger().info(json.dumps(data, default=str))
    except Exception:
        pass


def log_metrics(event: str, metrics: Dict[str, Any]) -> None:
    """Log numeric diagnostics (residuals, margins, counts) in a structured format."""
    try:
        data = {"timestamp": _now(), "event": event, "type": "metrics", "metrics": metrics}
        get_logger().info(json.dumps(data, default=str))
    except Exception:
        pass


def log_performance(event: str, duration_ms: float, **context: Any) -> None:
    """Log performance timing data."""
    try:
        data = {
            "timestamp": _now(),
            "event": event,
            "type": "performance",
            "duration_ms": duration_ms,
            **context,
        }
        get_logger().info(json.dumps(data, default=str))
    except Exception:
        pass
