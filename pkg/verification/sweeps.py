"""Seeded randomized sweeps over the majorization theorems."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from majolab import cft
from majolab.chains import ChainFamily, expected_derivative_sign, mode_derivative_sign
from majolab.config import ToleranceSettings
from majolab.errors import HypothesisViolated
from majolab.majorization import (
    direct_product,
    majorizes,
    random_majorized_chain,
    random_majorized_pair,
    shannon_entropy,
)
from majolab.schemas import CFTFlowParams, QFlow, ScalingSpectrum
from verification.issues import IssueType, VerificationIssue, issues_from_report

logger = logging.getLogger(__name__)

DEFAULT_L_GRID: tuple[float, ...] = tuple(float(2**k) for k in range(1, 9))
SUITES = ("cft-block", "cft-parameter", "majorization", "derivative-sign")
DERIVATIVE_CASES = ("xx", "heisenberg", "xy-lambda-above", "xy-lambda-below", "xy-gamma-above", "xy-gamma-below")


@dataclass(slots=True)
class SweepSummary:
    """Aggregate outcome of one suite."""

    suite: str
    draws: int
    checks: int = 0
    failures: int = 0
    max_normalization_error: float = 0.0
    issues: list[VerificationIssue] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, issue: VerificationIssue | None = None) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            if issue is not None:
                self.issues.append(issue)

    def to_dict(self) -> dict[str, object]:
        return {
            "suite": self.suite,
            "draws": self.draws,
            "checks": self.checks,
            "failures": self.failures,
            "passed": self.passed,
            "max_normalization_error": self.max_normalization_error,
        }


def random_spectrum(rng: np.random.Generator, max_levels: int = 6) -> ScalingSpectrum:
    """1..max_levels distinct exponents in (0, 5] with degeneracies 1..4."""

    while True:
        count = int(rng.integers(1, max_levels + 1))
        exponents = np.sort(5.0 - rng.uniform(0.0, 5.0, size=count))
        if np.all(np.diff(exponents) > 0.0):
            break
    degeneracies = rng.integers(1, 5, size=count)
    return ScalingSpectrum(exponents=tuple(exponents.tolist()), degeneracies=tuple(int(n) for n in degeneracies))


def random_qflow(rng: np.random.Generator, points: int = 5, increasing: bool = False) -> QFlow:
    qs = np.sort(rng.uniform(0.01, 0.95, size=points))
    if not increasing:
        qs = qs[::-1]
    return QFlow(samples=tuple((float(g), float(q)) for g, q in enumerate(qs)))


def cft_block_suite(
    draws: int,
    seed: int,
    L_grid: Sequence[float] = DEFAULT_L_GRID,
    tail_tol: float = cft.DEFAULT_TAIL_TOL,
    tol: float = 1e-12,
    normalization_tol: float = 1e-12,
) -> SweepSummary:
    """Random towers and κ in [0.5, 2]: every L pair must be ordered by majorization.

    Each distribution must also sum to one within tail_tol + normalization_tol.
    """

    rng = np.random.default_rng([seed, 0])
    summary = SweepSummary(suite="cft-block", draws=draws)
    for draw in range(draws):
        spec = random_spectrum(rng)
        params = CFTFlowParams(kappa=float(rng.uniform(0.5, 2.0)), uv_cutoff=1.0)
        report = cft.check_L_flow(spec, params, L_grid, tail_tol=tail_tol, tol=tol)
        error = max(abs(float(distribution.weights.sum()) - 1.0) for distribution in report.distributions)
        summary.max_normalization_error = max(summary.max_normalization_error, error)
        context = {"draw": draw, "exponents": list(spec.exponents), "kappa": params.kappa}
        issues = issues_from_report(report, context)
        if error > tail_tol + normalization_tol:
            issues.insert(
                0,
                VerificationIssue(IssueType.NORMALIZATION_ERROR, f"eigenvalues miss a unit sum by {error:.3e}", context),
            )
        summary.record(report.fine_grained and error <= tail_tol + normalization_tol, issues[0] if issues else None)
    return summary


def cft_parameter_suite(
    draws: int,
    seed: int,
    tol: float = 1e-12,
    tail_tol: float = cft.DEFAULT_TAIL_TOL,
) -> SweepSummary:
    """Random towers along random non-increasing q-flows; rising flows must be rejected."""

    rng = np.random.default_rng([seed, 1])
    summary = SweepSummary(suite="cft-parameter", draws=draws)
    for draw in range(draws):
        spec = random_spectrum(rng)
        report = cft.check_parameter_flow(spec, random_qflow(rng), tol=tol, tail_tol=tail_tol)
        issues = issues_from_report(report, {"draw": draw})
        summary.record(report.fine_grained, issues[0] if issues else None)

        rising = random_qflow(rng, increasing=True)
        try:
            cft.check_parameter_flow(spec, rising, tol=tol, tail_tol=tail_tol)
        except HypothesisViolated:
            summary.record(True)
        else:
            summary.record(
                False,
                VerificationIssue(
                    issue_type=IssueType.HYPOTHESIS_VIOLATED,
                    details="a rising q-flow was accepted",
                    context={"draw": draw, "q": rising.q_values},
                ),
            )
    return summary


def majorization_suite(draws: int, seed: int, tol: float = 1e-12, max_size: int = 8) -> SweepSummary:
    """Doubly stochastic pairs, Schur-concavity, the direct-product lemma and transitivity."""

    rng = np.random.default_rng([seed, 2])
    summary = SweepSummary(suite="majorization", draws=draws)

    def check(name: str, ok: bool, **context: object) -> None:
        issue = VerificationIssue(IssueType.MAJORIZATION_VIOLATION, f"{name} failed", dict(context))
        summary.record(ok, issue)

    def size() -> int:
        return int(rng.integers(1, max_size + 1))

    for draw in range(draws):
        n, mixing = size(), int(rng.integers(1, 6))
        x, y = random_majorized_pair(n, mixing, rng)
        check("doubly stochastic pair", majorizes(x, y, tol).x_majorized_by_y, draw=draw, n=n)
        check("schur concavity", shannon_entropy(x) >= shannon_entropy(y) - tol, draw=draw, n=n)

        x1, y1 = random_majorized_pair(size(), mixing, rng)
        x2, y2 = random_majorized_pair(size(), mixing, rng)
        lemma = majorizes(direct_product(x1, x2), direct_product(y1, y2), tol)
        check("direct product", lemma.x_majorized_by_y, draw=draw)

    for draw in range(max(1, draws // 2)):
        a, b, c = random_majorized_chain(size(), 3, int(rng.integers(1, 6)), rng)
        check("transitivity", majorizes(a, c, tol).x_majorized_by_y, draw=draw)
    return summary


def random_sign_point(rng: np.random.Generator, case: str) -> tuple[ChainFamily, float, int]:
    """An in-region (family, parameter, mode) triple for one row of the derivative-sign table."""

    if case == "xx":
        return ChainFamily.of("xx", "L"), float(rng.uniform(4.0, 200.0)), int(rng.integers(0, 3))
    if case == "heisenberg":
        return ChainFamily.of("heisenberg", "delta"), float(rng.uniform(1.2, 6.0)), int(rng.integers(0, 3))
    alpha = int(rng.integers(0, 2))
    if case in ("xy-lambda-above", "xy-gamma-above"):
        lam, gamma = float(rng.uniform(1.1, 1.5)), float(rng.uniform(0.5, 1.0))
    elif case in ("xy-lambda-below", "xy-gamma-below"):
        gamma = float(rng.uniform(0.4, 0.8))
        edge = math.sqrt(1.0 - gamma**2)
        lam = edge + float(rng.uniform(0.3, 0.9)) * (1.0 - edge)
    else:
        raise ValueError(f"unknown derivative case {case!r}")
    if case.startswith("xy-lambda"):
        return ChainFamily.of("xy", "lambda", gamma=gamma), lam, alpha
    return ChainFamily.of("xy", "gamma", lam=lam), gamma, alpha


def derivative_sign_suite(draws: int, seed: int, zero_tol: float = 1e-10) -> SweepSummary:
    """Finite-difference signs of the dominant mode probabilities against the closed-form table."""

    rng = np.random.default_rng([seed, 3])
    summary = SweepSummary(suite="derivative-sign", draws=draws)
    for case in DERIVATIVE_CASES:
        for draw in range(draws):
            family, param, alpha = random_sign_point(rng, case)
            expected = expected_derivative_sign(family, param, alpha)
            observed = mode_derivative_sign(family, param, alpha, zero_tol=zero_tol)
            issue = VerificationIssue(
                IssueType.DERIVATIVE_SIGN_MISMATCH,
                f"dP/d{family.parameter} has sign {observed}, expected {expected}",
                {"case": case, "draw": draw, "param": param, "alpha": alpha},
            )
            summary.record(observed == expected, issue)
    return summary


def run_sweeps(
    suite: str,
    draws: int,
    seed: int,
    tolerances: ToleranceSettings | None = None,
) -> list[SweepSummary]:
    tolerances = tolerances or ToleranceSettings()
    runners: dict[str, Callable[[], SweepSummary]] = {
        "cft-block": lambda: cft_block_suite(
            draws,
            seed,
            tail_tol=tolerances.tail,
            tol=tolerances.majorization,
            normalization_tol=tolerances.normalization,
        ),
        "cft-parameter": lambda: cft_parameter_suite(draws, seed, tol=tolerances.majorization, tail_tol=tolerances.tail),
        "majorization": lambda: majorization_suite(draws, seed, tol=tolerances.majorization),
        "derivative-sign": lambda: derivative_sign_suite(draws, seed, zero_tol=tolerances.zero_derivative),
    }
    names = SUITES if suite == "all" else (suite,)
    summaries = []
    for name in names:
        summary = runners[name]()
        logger.info("sweep %s: %d checks, %d failures", name, summary.checks, summary.failures)
        summaries.append(summary)
    return summaries


__all__ = (
    "SweepSummary",
    "SUITES",
    "DERIVATIVE_CASES",
    "random_spectrum",
    "random_qflow",
    "cft_block_suite",
    "cft_parameter_suite",
    "majorization_suite",
    "random_sign_point",
    "derivative_sign_suite",
    "run_sweeps",
)
