"""JSON and CSV renderings of spectra and flow reports.

Field names are fixed; docs/output_schema.md describes them. CSV numbers use
17 significant digits so every double round-trips.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

from majolab.majorization import Distribution, FlowReport, shannon_entropy


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def spectrum_document(
    model: dict[str, Any],
    distribution: Distribution,
    *,
    modes: int | None = None,
    tail_bound: float | None = None,
    critical: bool = False,
) -> dict[str, Any]:
    return {
        "model": model,
        "modes": modes,
        "tail_bound": tail_bound,
        "critical": critical,
        "entropy": shannon_entropy(distribution),
        "weights": distribution.as_list(),
    }


def _render(rows: Iterable[Sequence[str]], header: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def distribution_csv(distribution: Distribution) -> str:
    return _render(([fmt(w)] for w in distribution.weights), ("weight",))


def spectra_csv(points: Iterable[tuple[float, Distribution]]) -> str:
    """Long form: one (param, index, weight) row per eigenvalue."""

    rows = (
        (fmt(param), str(index), fmt(weight))
        for param, distribution in points
        for index, weight in enumerate(distribution.weights)
    )
    return _render(rows, ("param", "index", "weight"))


def flow_csv(report: FlowReport) -> str:
    """(param, entropy, largest eigenvalue, verdict) per point; the verdict compares with the previous point."""

    rows = []
    for i, (param, entropy, distribution) in enumerate(zip(report.points, report.entropies, report.distributions)):
        verdict = "" if i == 0 else report.adjacent(i - 1).report.verdict.value
        rows.append((fmt(param), fmt(entropy), fmt(distribution.largest), verdict))
    return _render(rows, ("param", "entropy", "largest_eigenvalue", "verdict"))


def comparison_csv(rows: Iterable[tuple[int, float, float]]) -> str:
    return _render(((str(i), fmt(a), fmt(b)) for i, a, b in rows), ("index", "ed_weight", "formula_weight"))


def flow_document(report: FlowReport, **extra: Any) -> dict[str, Any]:
    payload = report.to_dict()
    payload["fine_grained"] = report.fine_grained
    payload.update(extra)
    return payload


__all__ = (
    "fmt",
    "dumps",
    "spectrum_document",
    "distribution_csv",
    "spectra_csv",
    "flow_csv",
    "comparison_csv",
    "flow_document",
)
