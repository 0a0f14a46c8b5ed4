from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from posipath.core.exceptions import ConfigurationError
from posipath.core.paths import get_config_dir, get_project_root

_DEFAULTS: Dict[str, Any] = {
    "tolerances": {
        "symp": 1e-9,
        "circle": 1e-8,
        "real": 1e-8,
    },
    "paths": {
        "samples": 512,
        "blend_width": 1e-3,
    },
    "random": {
        "seed": 0,
    },
    "stability": {
        "mu_max": 10.0,
        "power_check_k": 64,
    },
}


def load_numerics(path: Optional[str] = None) -> Dict[str, Any]:
    """Load numerical defaults from config/settings.yaml (built-in defaults if absent)."""
    yaml_path = path or os.path.join(str(get_config_dir()), "settings.yaml")
    if not os.path.exists(yaml_path):
        return {k: dict(v) for k, v in _DEFAULTS.items()}
    try:
        with open(yaml_path, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Malformed settings file: {e}", config_key=yaml_path)
    if not isinstance(loaded, dict):
        raise ConfigurationError("Settings file must hold a mapping", config_key=yaml_path)
    merged = {k: dict(v) for k, v in _DEFAULTS.items()}
    for section, values in loaded.items():
        if isinstance(values, dict):
            merged.setdefault(section, {}).update(values)
    return merged


def _env_float(name: str, fallback: float) -> float:
    try:
        raw = os.getenv(name)
        return float(raw) if raw is not None and raw.strip() else fallback
    except Exception:
        return fallback


def _env_int(name: str, fallback: int) -> int:
    try:
        raw = os.getenv(name)
        return int(raw) if raw is not None and raw.strip() else fallback
    except Exception:
        return fallback


@dataclass
class Settings:
    tol_symp: float = 1e-9
    tol_circle: float = 1e-8
    tol_real: float = 1e-8
    samples: int = 512
    seed: int = 0
    blend_width: float = 1e-3
    mu_max: float = 10.0
    power_check_k: int = 64
    output_dir: Optional[str] = None
    numerics: Dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def load(yaml_path: Optional[str] = None) -> "Settings":
        # .env from the project root, then YAML, then environment overrides
        load_dotenv(dotenv_path=os.path.join(str(get_project_root()), ".env"))
        num = load_numerics(yaml_path)
        tol = num.get("tolerances", {})
        pth = num.get("paths", {})
        stab = num.get("stability", {})
        return Settings(
            tol_symp=_env_float("POSIPATH_TOL_SYMP", float(tol.get("symp", 1e-9))),
            tol_circle=_env_float("POSIPATH_TOL_CIRCLE", float(tol.get("circle", 1e-8))),
            tol_real=_env_float("POSIPATH_TOL_REAL", float(tol.get("real", 1e-8))),
            samples=_env_int("POSIPATH_SAMPLES", int(pth.get("samples", 512))),
            seed=_env_int("POSIPATH_SEED", int(num.get("random", {}).get("seed", 0))),
            blend_width=_env_float("POSIPATH_BLEND_WIDTH", float(pth.get("blend_width", 1e-3))),
            mu_max=float(stab.get("mu_max", 10.0)),
            power_check_k=int(stab.get("power_check_k", 64)),
            output_dir=os.getenv("POSIPATH_OUTPUT_DIR") or None,
            numerics=num,
        )
