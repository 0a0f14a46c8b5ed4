#!/usr/bin/env python3
"""
Tests for configuration loading, the exception hierarchy and JSON error payloads.

Usage:
    python -m pytest tests/test_settings_errors.py -v
"""
import json
import math

import numpy as np
import pytest

from posipath.core.errors import _make_json_safe, create_error_response
from posipath.core.exceptions import (
    ConfigurationError,
    DimensionError,
    InfeasibleRouteError,
    NumericalError,
    UnsupportedError,
    ValidationError,
    exit_code_for,
)
from posipath.core.settings import Settings, load_numerics
from posipath.services.export_service import dumps_json


# ============================================================================
# Settings
# ============================================================================

class TestSettings:
    def test_defaults_from_yaml(self):
        s = Settings.load()
        assert s.tol_symp == pytest.approx(1e-9)
        assert s.tol_circle == pytest.approx(1e-8)
        assert s.samples == 512 and s.seed == 0
        assert s.mu_max == pytest.approx(10.0)

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("POSIPATH_SAMPLES", "64")
        monkeypatch.setenv("POSIPATH_TOL_CIRCLE", "1e-6")
        s = Settings.load()
        assert s.samples == 64 and s.tol_circle == pytest.approx(1e-6)

    def test_bad_environment_value_falls_back(self, monkeypatch):
        monkeypatch.setenv("POSIPATH_SEED", "not-a-number")
        assert Settings.load().seed == 0

    def test_partial_yaml_keeps_defaults(self, tmp_path):
        p = tmp_path / "settings.yaml"
        p.write_text("paths:\n  samples: 128\n", encoding="utf-8")
        s = Settings.load(str(p))
        assert s.samples == 128
        assert s.tol_real == pytest.approx(1e-8)

    def test_missing_yaml_uses_builtins(self, tmp_path):
        num = load_numerics(str(tmp_path / "absent.yaml"))
        assert num["stability"]["power_check_k"] == 64

    def test_malformed_yaml(self, tmp_path):
        p = tmp_path / "settings.yaml"
        p.write_text("paths: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_numerics(str(p))

    def test_non_mapping_yaml(self, tmp_path):
        p = tmp_path / "settings.yaml"
        p.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_numerics(str(p))


# ============================================================================
# Exceptions
# ============================================================================

class TestExceptions:
    def test_exit_codes(self):
        assert ValidationError("x").exit_code == 2
        assert DimensionError("x").exit_code == 2
        assert UnsupportedError("x").exit_code == 2
        assert ConfigurationError("x").exit_code == 2
        assert InfeasibleRouteError("x", rule="short-path parity").exit_code == 3
        assert NumericalError("x").exit_code == 4
        assert exit_code_for(RuntimeError("boom")) == 4

    def test_dimension_error_is_a_validation_error(self):
        e = DimensionError("odd", shape=[3, 3])
        assert isinstance(e, ValidationError)
        assert e.error_code == "DIMENSION_ERROR" and e.details["shape"] == [3, 3]

    def test_rule_is_kept(self):
        e = InfeasibleRouteError("no", rule="exit only via N-", details={"sign": 1})
        assert e.rule == "exit only via N-"
        assert e.details == {"rule": "exit only via N-", "sign": 1}


class TestErrorPayloads:
    def test_known_exception(self):
        payload = create_error_response(NumericalError("stuck", details={"residual": np.float64(1e-3)}))
        assert payload["error"] == "NUMERICAL_ERROR"
        assert payload["details"]["residual"] == pytest.approx(1e-3)
        assert "timestamp" in payload
        json.dumps(payload)

    def test_unknown_exception(self):
        payload = create_error_response(KeyError("k"))
        assert payload["error"] == "INTERNAL_ERROR"

    def test_json_safe_conversion(self):
        out = _make_json_safe({"a": np.arange(3), "z": 1 + 2j, "b": np.bool_(True), "n": np.int64(4)})
        assert out == {"a": [0, 1, 2], "z": {"re": 1.0, "im": 2.0}, "b": True, "n": 4}

    def test_non_finite_values_become_null(self):
        out = _make_json_safe({"mu0": math.inf, "gap": np.float64("nan"), "row": np.array([1.0, -np.inf]),
                               "z": complex(math.inf, 1.0)})
        assert out == {"mu0": None, "gap": None, "row": [1.0, None], "z": {"re": None, "im": 1.0}}

    def test_error_payload_is_strict_json(self):
        exc = NumericalError("no crossing", details={"mu0": math.inf, "bracket": [0.0, float("nan")]})
        payload = create_error_response(exc)
        text = json.dumps(payload, allow_nan=False)
        assert "Infinity" not in text and "NaN" not in text
        assert payload["details"]["mu0"] is None
        assert dumps_json({"mu0": math.inf}) == '{"mu0": null}\n'


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
