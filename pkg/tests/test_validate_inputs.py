"""Tests for the input validation CLI utilities."""

from __future__ import annotations

import json
from pathlib import Path
import sys

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

from tools import validate_inputs


def _write_spec(path: Path, payload: object) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def _write_qflow(path: Path, rows: list[str], header: str = "g,q") -> Path:
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


def test_shipped_inputs_are_valid() -> None:
    errors = validate_inputs.validate_inputs([ROOT / "data" / "ising.json"], [ROOT / "data" / "qflow_decreasing.csv"])

    assert errors == []


def test_spectrum_with_descending_exponents(tmp_path: Path) -> None:
    path = _write_spec(tmp_path / "spec.json", {"exponents": [1.0, 0.5], "degeneracies": [1, 1]})

    errors = validate_inputs.validate_inputs([path], [])

    assert errors and "exponents" in errors[0]
    assert "strictly increasing" in errors[0]


def test_spectrum_with_unknown_field(tmp_path: Path) -> None:
    path = _write_spec(tmp_path / "spec.json", {"exponents": [1.0], "degeneracies": [1], "central_charge": 0.5})

    errors = validate_inputs.validate_inputs([path], [])

    assert any("central_charge" in err for err in errors)


def test_spectrum_must_be_an_object(tmp_path: Path) -> None:
    path = _write_spec(tmp_path / "spec.json", [1, 2, 3])

    errors = validate_inputs.validate_inputs([path], [])

    assert errors == [f"{path}: expected an object root"]


def test_spectrum_invalid_json(tmp_path: Path) -> None:
    path = tmp_path / "spec.json"
    path.write_text("{not json", encoding="utf-8")

    errors = validate_inputs.validate_inputs([path], [])

    assert errors and "invalid JSON" in errors[0]


def test_qflow_row_errors(tmp_path: Path) -> None:
    path = _write_qflow(tmp_path / "q.csv", ["0,0.5", "0,0.4", "1,1.2", "2,abc"])

    errors = validate_inputs.validate_inputs([], [path])

    assert f"{path}:3 g=0.0 does not increase" in errors
    assert f"{path}:4 q=1.2 outside (0, 1)" in errors
    assert f"{path}:5 g and q must be numbers" in errors


def test_qflow_header(tmp_path: Path) -> None:
    path = _write_qflow(tmp_path / "q.csv", ["0,0.5"], header="x,y")

    errors = validate_inputs.validate_inputs([], [path])

    assert errors == [f"{path}: header must contain 'g' and 'q'"]


def test_qflow_without_samples(tmp_path: Path) -> None:
    path = _write_qflow(tmp_path / "q.csv", [])

    assert validate_inputs.validate_inputs([], [path]) == [f"{path}: no samples"]


def test_main_without_files_exits_cleanly(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as excinfo:
        validate_inputs.main([])

    assert excinfo.value.code == 0
    assert "nothing to validate" in capsys.readouterr().err


def test_main_reports_errors(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = _write_qflow(tmp_path / "q.csv", ["0,1.5"])

    with pytest.raises(SystemExit) as excinfo:
        validate_inputs.main(["--qflow", str(path)])

    err = capsys.readouterr().err
    assert excinfo.value.code == 1
    assert err.startswith("ERROR: ")
    assert "Validation failed with 1 issue(s)." in err


def test_main_success(capsys: pytest.CaptureFixture[str]) -> None:
    validate_inputs.main(["--spec", str(ROOT / "data" / "ising.json")])

    assert "Validation succeeded" in capsys.readouterr().out


def test_print_spectrum_schema(capsys: pytest.CaptureFixture[str]) -> None:
    validate_inputs.main(["--print-schema", "spectrum"])

    schema = json.loads(capsys.readouterr().out)
    assert {"exponents", "degeneracies", "kappa", "uv_cutoff"} <= set(schema["properties"])
    assert schema["additionalProperties"] is False


def test_print_chain_schema(capsys: pytest.CaptureFixture[str]) -> None:
    validate_inputs.main(["--print-schema", "chain"])

    schema = json.loads(capsys.readouterr().out)
    assert len(schema["oneOf"]) == 3
    assert schema["discriminator"]["propertyName"] == "kind"
