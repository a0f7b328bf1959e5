"""Issue records emitted by flow checks and sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from majolab.majorization import FlowReport


class IssueType(str, Enum):
    """Classification of verification issues for CI reporting."""

    MAJORIZATION_VIOLATION = "majorization_violation"
    ENTROPY_ANOMALY = "entropy_anomaly"
    HYPOTHESIS_VIOLATED = "hypothesis_violated"
    CONFIG_ERROR = "config_error"
    COMPUTATION_ERROR = "computation_error"
    NORMALIZATION_ERROR = "normalization_error"
    DERIVATIVE_SIGN_MISMATCH = "derivative_sign_mismatch"


@dataclass(slots=True)
class VerificationIssue:
    """Structured issue emitted by the CLI and the sweep runner."""

    issue_type: IssueType
    details: str
    context: dict[str, Any] = field(default_factory=dict)
    severity: str = "ERROR"

    def to_dict(self) -> dict[str, Any]:
        return {
            "issue_type": self.issue_type.value,
            "details": self.details,
            "context": self.context,
            "severity": self.severity,
        }


def issues_from_report(report: FlowReport, context: dict[str, Any] | None = None) -> list[VerificationIssue]:
    """One issue per failing pair, plus warnings for entropy steps against the expected direction."""

    context = dict(context or {})
    issues: list[VerificationIssue] = []
    for pair in report.violations():
        issues.append(
            VerificationIssue(
                issue_type=IssueType.MAJORIZATION_VIOLATION,
                details=(
                    f"{report.direction.value} fails between {report.points[pair.lower]!r} and "
                    f"{report.points[pair.upper]!r} ({pair.report.verdict.value}, first cumulant {pair.report.first_violation})"
                ),
                context={**context, "lower": report.points[pair.lower], "upper": report.points[pair.upper]},
            )
        )
    for index in report.entropy_anomalies:
        issues.append(
            VerificationIssue(
                issue_type=IssueType.ENTROPY_ANOMALY,
                details=f"entropy moves against {report.direction.value} between steps {index} and {index + 1}",
                context={**context, "step": index},
                severity="WARNING",
            )
        )
    return issues


def write_issues(path: Path, issues: Iterable[VerificationIssue]) -> None:
    with path.open("a", encoding="utf-8") as handle:
        for issue in issues:
            handle.write(json.dumps(issue.to_dict(), sort_keys=True) + "\n")


__all__ = ("IssueType", "VerificationIssue", "issues_from_report", "write_issues")
