#!/usr/bin/env python3
"""
End-to-end tests for the command line: file schemas, exit codes and the
emitted artifacts.

Usage:
    python -m pytest tests/test_cli.py -v
"""
import json
import math

import numpy as np
import pytest

from posipath.cli.main import main
from posipath.core.symplectic import hyperbolic, rotation
from posipath.models.schemas import MatrixModel, PathModel, SystemModel, parse_model
from posipath.core.exceptions import ValidationError
from posipath.services.positive_paths import endpoint, make_path, verify_positive


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload), encoding="utf-8")
    return str(p)


def _matrix(tmp_path, name, A):
    A = np.asarray(A, dtype=float)
    return _write(tmp_path, name, {"dim": A.shape[0], "rows": A.tolist()})


def _path(tmp_path, name, segments, dim=2):
    return _write(tmp_path, name, {
        "dim": dim,
        "segments": [{"duration": d, "generator_P": np.asarray(P, dtype=float).tolist()} for d, P in segments],
    })


def _system(tmp_path, name, segments, dim=2):
    return _write(tmp_path, name, {
        "dim": dim,
        "periodic": True,
        "segments": [{"duration": d, "generator_P": np.asarray(P, dtype=float).tolist()} for d, P in segments],
    })


def _stdout_json(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    return [json.loads(line) for line in out]


# ============================================================================
# Schemas
# ============================================================================

class TestSchemas:
    def test_matrix_shape(self):
        with pytest.raises(ValidationError):
            parse_model(MatrixModel, {"dim": 2, "rows": [[1.0, 0.0]]})
        with pytest.raises(ValidationError):
            parse_model(MatrixModel, {"dim": 3, "rows": [[1.0] * 3] * 3})

    def test_path_round_trip(self):
        path = make_path([(0.5, np.diag([2.0, 1.0])), (0.25, np.eye(2))], origin=rotation(0.3))
        back = parse_model(PathModel, PathModel.from_path(path).model_dump()).to_path()
        assert np.allclose(endpoint(back), endpoint(path), atol=1e-14)

    def test_path_rejects_zero_duration(self):
        with pytest.raises(ValidationError):
            parse_model(PathModel, {"dim": 2, "segments": [{"duration": 0.0, "generator_P": [[1, 0], [0, 1]]}]})

    def test_system_durations(self):
        with pytest.raises(ValidationError):
            parse_model(SystemModel, {"dim": 2, "segments": [
                {"duration": 0.5, "generator_P": [[1, 0], [0, 1]]}]})
        with pytest.raises(ValidationError):
            parse_model(SystemModel, {"dim": 2, "periodic": False, "segments": [
                {"duration": 1.0, "generator_P": [[1, 0], [0, 1]]}]})


# ============================================================================
# Verbs
# ============================================================================

class TestClassifyVerb:
    def test_rotation(self, tmp_path, capsys):
        code = main(["classify", "-i", _matrix(tmp_path, "rot.json", rotation(1.0))])
        assert code == 0
        out = _stdout_json(capsys)[0]
        assert out["region"] == "O_U_plus"
        assert out["groups"][0]["splitting"] == 1

    def test_nilpotent_sign_is_printed(self, tmp_path, capsys):
        code = main(["classify", "-i", _matrix(tmp_path, "n.json", [[1.0, 0.0], [-1.0, 1.0]])])
        assert code == 0
        out = _stdout_json(capsys)[0]
        assert out["region"] == "AtPlusOne" and out["nilpotent_sign"] == "-"

    def test_non_symplectic_input(self, tmp_path, capsys):
        code = main(["classify", "-i", _matrix(tmp_path, "bad.json", [[1.0, 1.0], [0.0, 2.0]])])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "VALIDATION_ERROR"

    def test_missing_file(self, tmp_path, capsys):
        assert main(["classify", "-i", str(tmp_path / "missing.json")]) == 2

    def test_malformed_json(self, tmp_path, capsys):
        p = tmp_path / "broken.json"
        p.write_text("{not json", encoding="utf-8")
        assert main(["classify", "-i", str(p)]) == 2


class TestPathVerbs:
    def test_index(self, tmp_path, capsys):
        code = main(["--samples", "128", "index", "-i", _path(tmp_path, "p.json", [(math.pi, np.eye(2))])])
        assert code == 0
        out = _stdout_json(capsys)[0]
        assert out["cz_index"] == 0 and out["short"] is True and out["positive"] is True

    def test_connect_writes_path(self, tmp_path, capsys):
        target = _matrix(tmp_path, "b.json", hyperbolic(-2.0))
        out_file = tmp_path / "path.json"
        code = main(["connect", "-b", target, "-o", str(out_file)])
        assert code == 0
        assert _stdout_json(capsys)[0]["positive"] is True
        path = parse_model(PathModel, json.loads(out_file.read_text(encoding="utf-8"))).to_path()
        assert verify_positive(path).positive
        assert np.max(np.abs(endpoint(path) - hyperbolic(-2.0))) <= 1e-8

    def test_short_connect_parity_failure(self, tmp_path, capsys):
        target = _matrix(tmp_path, "b.json", hyperbolic(2.0))
        code = main(["connect", "-b", target, "--short", "-o", str(tmp_path / "x.json")])
        assert code == 3
        err = json.loads(capsys.readouterr().err)
        assert err["details"]["rule"] == "short-path parity"
        assert not (tmp_path / "x.json").exists()

    def test_relative_output_lands_in_output_dir(self, tmp_path, capsys):
        target = _matrix(tmp_path, "b.json", rotation(1.0))
        out_dir = tmp_path / "artifacts"
        code = main(["--output-dir", str(out_dir), "connect", "-b", target])
        assert code == 0
        assert (out_dir / "path.json").exists()

    def test_extend(self, tmp_path, capsys):
        src = _path(tmp_path, "short.json", [(1.0, np.eye(2))])
        out_file = tmp_path / "ext.json"
        assert main(["extend", "-i", src, "-o", str(out_file)]) == 0
        assert out_file.exists()

    def test_trace_is_reproducible(self, tmp_path, capsys):
        src = _path(tmp_path, "p.json", [(0.5, np.eye(4)), (0.5, np.diag([1.0, 1.0, 2.0, 2.0]))], dim=4)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        svg = tmp_path / "a.svg"
        assert main(["--samples", "64", "trace", "-i", src, "-o", str(a), "--svg", str(svg)]) == 0
        assert main(["--samples", "64", "trace", "-i", src, "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text(encoding="utf-8").splitlines()[0]
        assert header == "t,group,lambda_re,lambda_im,kind,splitting,stratum"
        assert "<svg" in svg.read_text(encoding="utf-8")


class TestSystemVerbs:
    def test_sweep(self, tmp_path, capsys):
        src = _system(tmp_path, "sys.json", [(1.0, np.eye(2))])
        out_file = tmp_path / "sweep.csv"
        code = main(["sweep", "--system", src, "--mu-max", "4", "--points", "5", "-o", str(out_file)])
        assert code == 0
        out = _stdout_json(capsys)[0]
        assert out["mu0"] == pytest.approx(math.pi, abs=1e-8)
        lines = out_file.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "mu,stable,strongly_stable,min_abs_det_plus"
        assert len(lines) == 6
        assert lines[2].split(",")[1] in ("true", "false")

    def test_sweep_without_crossing(self, tmp_path, capsys):
        src = _system(tmp_path, "sys.json", [(1.0, np.eye(2))])
        assert main(["sweep", "--system", src, "--mu-max", "2", "-o", str(tmp_path / "s.csv")]) == 0
        assert _stdout_json(capsys)[0]["mu0"] is None

    def test_stability_of_monodromy(self, tmp_path, capsys):
        src = _system(tmp_path, "sys.json", [(0.5, np.eye(2)), (0.5, np.diag([2.0, 1.0]))])
        assert main(["stability", "--system", src, "--mu", "0.5"]) == 0
        out = _stdout_json(capsys)[0]
        assert out["stable"] is True and out["strongly_stable"] is True

    def test_stability_of_paths(self, tmp_path, capsys):
        src = _path(tmp_path, "p.json", [(1.0, np.eye(4))], dim=4)
        report = tmp_path / "report.jsonl"
        assert main(["--samples", "128", "stability", "--paths", src, "-o", str(report)]) == 0
        rows = [json.loads(line) for line in report.read_text(encoding="utf-8").splitlines()]
        assert rows[0]["excursions"] == 0 and rows[0]["violations"] == []


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
