"""CLI for validating scaling-spectrum JSON documents and q-flow CSV files."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Iterable

from pydantic import ValidationError

from majolab import schemas


def parse_args(argv: Iterable[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spec", type=Path, action="append", default=[], help="Scaling spectrum JSON (repeatable)")
    parser.add_argument("--qflow", type=Path, action="append", default=[], help="q-flow CSV with columns g,q (repeatable)")
    parser.add_argument(
        "--print-schema",
        choices=("spectrum", "chain"),
        help="Print the JSON schema of spectrum documents or chain descriptors and exit",
    )
    return parser.parse_args(argv)


def validate_spectrum(path: Path, errors: list[str]) -> schemas.ScalingSpectrum | None:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:  # pragma: no cover - surfaced directly to CLI
        errors.append(f"{path}: unable to open file ({exc})")
        return None
    except json.JSONDecodeError as exc:
        errors.append(f"{path}: invalid JSON ({exc.msg})")
        return None
    if not isinstance(payload, dict):
        errors.append(f"{path}: expected an object root")
        return None
    try:
        spectrum, _ = schemas.SpectrumDocument.model_validate(payload).split()
    except ValidationError as exc:
        for error in exc.errors(include_url=False):
            location = ".".join(str(part) for part in error["loc"]) or "<root>"
            errors.append(f"{path}: {location}: {error['msg']}")
        return None
    return spectrum


def validate_qflow(path: Path, errors: list[str]) -> schemas.QFlow | None:
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None or not {"g", "q"} <= set(reader.fieldnames):
                errors.append(f"{path}: header must contain 'g' and 'q'")
                return None
            rows = list(enumerate(reader, 2))
    except OSError as exc:  # pragma: no cover - surfaced directly to CLI
        errors.append(f"{path}: unable to open file ({exc})")
        return None

    samples: list[tuple[float, float]] = []
    before = len(errors)
    for lineno, row in rows:
        try:
            g, q = float(row["g"]), float(row["q"])
        except (TypeError, ValueError):
            errors.append(f"{path}:{lineno} g and q must be numbers")
            continue
        if not 0.0 < q < 1.0:
            errors.append(f"{path}:{lineno} q={q} outside (0, 1)")
        if samples and g <= samples[-1][0]:
            errors.append(f"{path}:{lineno} g={g} does not increase")
        samples.append((g, q))
    if not samples:
        errors.append(f"{path}: no samples")
    if len(errors) > before:
        return None
    return schemas.QFlow(samples=tuple(samples))


def validate_inputs(spec_paths: Iterable[Path], qflow_paths: Iterable[Path]) -> list[str]:
    errors: list[str] = []
    for path in spec_paths:
        validate_spectrum(path, errors)
    for path in qflow_paths:
        validate_qflow(path, errors)
    return errors


def main(argv: Iterable[str] | None = None) -> None:
    args = parse_args(argv)
    if args.print_schema:
        schema = schemas.spectrum_json_schema() if args.print_schema == "spectrum" else schemas.chain_json_schema()
        print(json.dumps(schema, indent=2, sort_keys=True))
        return
    if not args.spec and not args.qflow:
        print("No files provided; nothing to validate. Pass --spec and/or --qflow.", file=sys.stderr)
        raise SystemExit(0)

    errors = validate_inputs(args.spec, args.qflow)
    if errors:
        for issue in errors:
            print(f"ERROR: {issue}", file=sys.stderr)
        print(f"Validation failed with {len(errors)} issue(s).", file=sys.stderr)
        raise SystemExit(1)
    print("Validation succeeded: inputs are schema-compliant.")


if __name__ == "__main__":
    main()
