"""
Centralized path configuration.

Single source of truth for the project root and the config, logs and
output directories.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional


def get_project_root() -> Path:
    """
    Get the project root directory.

    This file is in posipath/core/, so parent.parent.parent is the root.
    """
    return Path(__file__).resolve().parent.parent.parent


def _ensure(directory: Path) -> Path:
    # Only try to create directory if not on read-only filesystem
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError:
        pass
    return directory


def get_config_dir() -> Path:
    """Get the config directory (holds settings.yaml)."""
    return get_project_root() / "config"


def get_logs_dir() -> Path:
    """
    Get the logs directory.

    POSIPATH_LOG_DIR overrides the default <root>/logs.
    """
    env_path = os.getenv("POSIPATH_LOG_DIR")
    if env_path:
        return _ensure(Path(env_path))
    return _ensure(get_project_root() / "logs")


def get_output_dir(env_override: Optional[str] = None) -> Path:
    """
    Get the output directory for emitted artifacts.

    Args:
        env_override: Explicit directory; relative paths resolve against
            the current working directory.

    Returns:
        Path: Absolute output directory (created when possible)
    """
    candidate = env_override or os.getenv("POSIPATH_OUTPUT_DIR")
    if candidate:
        output_dir = Path(candidate)
        if not output_dir.is_absolute():
            output_dir = Path.cwd() / output_dir
    else:
        output_dir = get_project_root() / "data" / "output"
    return _ensure(output_dir)
