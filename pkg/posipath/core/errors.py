"""JSON error payloads for the command line surface."""
from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from typing import Any, Dict

import numpy as np

from posipath.core.exceptions import PosipathException


def _make_json_safe(obj: Any) -> Any:
    """Recursively convert objects to JSON-serializable forms.

    Non-finite floats become None so the result is strict JSON.
    """
    if isinstance(obj, np.ndarray):
        return _make_json_safe(obj.tolist())
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _make_json_safe(float(obj.real)), "im": _make_json_safe(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, dict):
        return {str(_make_json_safe(k)): _make_json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [_make_json_safe(v) for v in obj]
    if isinstance(obj, BaseException):
        return str(obj)
    try:
        json.dumps(obj)
        return obj
    except (TypeError, ValueError):
        pass
    # Fallback to string repr
    return repr(obj)


def create_error_response(exc: BaseException) -> Dict[str, Any]:
    """Create a standardized error object (always JSON-serializable)."""
    if isinstance(exc, PosipathException):
        payload = exc.to_dict()
    else:
        payload = {"error": "INTERNAL_ERROR", "message": str(exc), "details": {}}
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    return _make_json_safe(payload)
