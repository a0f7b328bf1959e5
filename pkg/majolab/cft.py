"""Eigenvalue towers of a (1+1)-dimensional CFT block and checks of their majorization flows.

A block of length L has reduced-density-matrix eigenvalues

    [1, q^{α_1} (n_1 times), q^{α_2} (n_2 times), ...] / Z̃(q),
    Z̃(q) = 1 + Σ n_i q^{α_i},   q = exp(-2πκ / ln(L / cutoff)).

The q^{-b} prefactor cancels on normalization and is never computed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from majolab.errors import (
    BlockTooSmall,
    HypothesisViolated,
    InputError,
    NonMonotoneParameter,
    QOutOfRange,
    StepLeavesDomain,
)
from majolab.majorization import DEFAULT_TOL, Distribution, FlowDirection, FlowReport, canonicalize, flow_report
from majolab.schemas import CFTFlowParams, QFlow, ScalingSpectrum

logger = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = 1e-14


def q_of_L(L: float, params: CFTFlowParams) -> float:
    """Modular factor q(L) in (0, 1), strictly increasing in L."""

    if not L > params.uv_cutoff:
        raise BlockTooSmall(f"L={L} must exceed the UV cutoff {params.uv_cutoff}")
    return math.exp(-2.0 * math.pi * params.kappa / math.log(L / params.uv_cutoff))


def dq_dL(L: float, params: CFTFlowParams) -> float:
    """Analytic derivative of `q_of_L`: q · 2πκ / (L ln²(L / cutoff))."""

    log_ratio = math.log(L / params.uv_cutoff)
    return q_of_L(L, params) * 2.0 * math.pi * params.kappa / (L * log_ratio * log_ratio)


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise QOutOfRange(f"q must lie in [0, 1), got {q!r}")
    return q


def z_tilde(spec: ScalingSpectrum, q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[float, int]:
    """Partial sum of Z̃(q) and the number of tower levels it used.

    Summation stops at the first level with n_i q^{α_i} < tail_tol · (current sum).
    """

    q = _check_q(q)
    if tail_tol <= 0.0:
        raise InputError(f"tail_tol must be positive, got {tail_tol}")
    total = 1.0
    used = 0
    for alpha, n in zip(spec.exponents, spec.degeneracies):
        term = n * q**alpha
        if term < tail_tol * total:
            break
        total += term
        used += 1
    return total, used


def _tower(spec: ScalingSpectrum, q: float, terms: int) -> np.ndarray:
    levels = [np.ones(1)]
    for alpha, n in zip(spec.exponents[:terms], spec.degeneracies[:terms]):
        levels.append(np.full(n, q**alpha))
    return np.concatenate(levels)


def eigenvalues(
    spec: ScalingSpectrum,
    q: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    terms: int | None = None,
) -> Distribution:
    """Normalized eigenvalues at q with degeneracies replicated.

    ``terms`` overrides the tail cutoff with a fixed number of tower levels,
    so that distributions compared with each other share an index set.
    """

    q = _check_q(q)
    if terms is None:
        _, terms = z_tilde(spec, q, tail_tol)
    terms = max(0, min(int(terms), len(spec.exponents)))
    return canonicalize(_tower(spec, q, terms), normalize=True)


def level_eigenvalue(spec: ScalingSpectrum, q: float, level: int, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Distinct eigenvalue of tower level ``level`` (1 is the vacuum): q^{α_{level-1}} / Z̃(q)."""

    q = _check_q(q)
    if not 1 <= level <= len(spec.exponents) + 1:
        raise InputError(f"level must lie in 1..{len(spec.exponents) + 1}, got {level}")
    total, _ = z_tilde(spec, q, tail_tol)
    numerator = 1.0 if level == 1 else q ** spec.exponents[level - 2]
    return numerator / total


def _shared_terms(spec: ScalingSpectrum, qs: Sequence[float], tail_tol: float) -> int:
    return max(z_tilde(spec, q, tail_tol)[1] for q in qs)


def check_L_flow(
    spec: ScalingSpectrum,
    params: CFTFlowParams,
    L_grid: Sequence[float],
    tail_tol: float = DEFAULT_TAIL_TOL,
    tol: float = DEFAULT_TOL,
) -> FlowReport:
    """Verify ρ_L ≺ ρ_L' for every pair L >= L' of a strictly increasing grid."""

    grid = [float(L) for L in L_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise NonMonotoneParameter(f"L grid must be strictly increasing, got {grid}")
    qs = [q_of_L(L, params) for L in grid]
    terms = _shared_terms(spec, qs, tail_tol)
    logger.debug("L flow over %d points keeps %d tower levels", len(grid), terms)
    points = [(L, eigenvalues(spec, q, tail_tol, terms)) for L, q in zip(grid, qs)]
    return flow_report(points, FlowDirection.DESCENDING_MAJORIZES, tol=tol, entropy_tol=max(tol, tail_tol))


def check_parameter_flow(
    spec: ScalingSpectrum,
    qflow: QFlow,
    tol: float = DEFAULT_TOL,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> FlowReport:
    """Verify ρ(g₁) ≺ ρ(g₂) for g₂ >= g₁ along a flow whose q does not increase with g.

    A q that increases anywhere means the flow is outside the hypothesis and
    raises `HypothesisViolated` instead of producing a report.
    """

    gs, qs = qflow.parameters, qflow.q_values
    if any(b <= a for a, b in zip(gs, gs[1:])):
        raise NonMonotoneParameter(f"q-flow samples must be ordered by strictly increasing g, got {gs}")
    rising = [i for i, (a, b) in enumerate(zip(qs, qs[1:])) if b > a]
    if rising:
        i = rising[0]
        raise HypothesisViolated(
            f"q increases from {qs[i]} at g={gs[i]} to {qs[i + 1]} at g={gs[i + 1]}; the flow does not preserve the ordering hypothesis"
        )
    terms = _shared_terms(spec, qs, tail_tol)
    points = [(g, eigenvalues(spec, q, tail_tol, terms)) for g, q in zip(gs, qs)]
    return flow_report(points, FlowDirection.ASCENDING_MAJORIZES, tol=tol, entropy_tol=max(tol, tail_tol))


class DerivativeProbe(NamedTuple):
    sign: int
    second_cumulant_sign: int


def _sign(value: float, zero_tol: float) -> int:
    if abs(value) <= zero_tol:
        return 0
    return 1 if value > 0 else -1


def eigenvalue_derivative_probe(
    spec: ScalingSpectrum,
    params: CFTFlowParams,
    L: float,
    l: int,
    h: float = 1e-3,
    tail_tol: float = DEFAULT_TAIL_TOL,
    zero_tol: float = 1e-12,
) -> DerivativeProbe:
    """Central-difference signs of dλ_l/dL and d(λ₁ + λ₂)/dL.

    ``l`` indexes distinct tower levels, 1 being the vacuum eigenvalue.
    """

    if h <= 0.0 or not L - h > params.uv_cutoff:
        raise StepLeavesDomain(f"L - h = {L - h} must exceed the UV cutoff {params.uv_cutoff}")
    if not 1 <= l <= len(spec.exponents) + 1:
        raise InputError(f"level must lie in 1..{len(spec.exponents) + 1}, got {l}")
    lo, hi = q_of_L(L - h, params), q_of_L(L + h, params)
    terms = _shared_terms(spec, (lo, hi), tail_tol)

    def levels(q: float) -> np.ndarray:
        tower = np.concatenate(([1.0], [q**alpha for alpha in spec.exponents[:terms]]))
        total = 1.0 + sum(n * q**alpha for alpha, n in zip(spec.exponents[:terms], spec.degeneracies[:terms]))
        padded = np.zeros(len(spec.exponents) + 1)
        padded[: tower.size] = tower / total
        return padded

    below, above = levels(lo), levels(hi)
    step = (above - below) / (2.0 * h)
    return DerivativeProbe(
        sign=_sign(float(step[l - 1]), zero_tol),
        second_cumulant_sign=_sign(float(step[0] + step[1]) if step.size > 1 else float(step[0]), zero_tol),
    )


def _mean_exponent(spec: ScalingSpectrum, q: float, terms: int | None = None) -> tuple[float, float]:
    """Z̃(q) and Σ n_i α_i q^{α_i} / Z̃(q), the vacuum counting with exponent 0."""

    pairs = list(zip(spec.exponents, spec.degeneracies))[:terms]
    total = 1.0 + sum(n * q**alpha for alpha, n in pairs)
    return total, sum(n * alpha * q**alpha for alpha, n in pairs) / total


def eigenvalue_derivative(spec: ScalingSpectrum, params: CFTFlowParams, L: float, l: int) -> float:
    """Closed-form dλ_l/dL over the untruncated tower.

    dλ_l/dL = q^{α-1}/Z̃ · (α - ⟨α⟩) · dq/dL with α = α_{l-1} (0 for the vacuum)
    and ⟨α⟩ = Σ n_i α_i q^{α_i} / Z̃.
    """

    if not 1 <= l <= len(spec.exponents) + 1:
        raise InputError(f"level must lie in 1..{len(spec.exponents) + 1}, got {l}")
    q = q_of_L(L, params)
    dq = dq_dL(L, params)
    total, mean_alpha = _mean_exponent(spec, q)
    alpha = 0.0 if l == 1 else spec.exponents[l - 2]
    return q ** (alpha - 1.0) / total * (alpha - mean_alpha) * dq


class SecondEigenvalueCase(str, Enum):
    """Which way the second cumulant is shown to decrease with L."""

    ALL_SUBSEQUENT_INCREASING = "all-subsequent-increasing"
    SECOND_DECREASING = "second-decreasing"


@dataclass(frozen=True, slots=True)
class DerivativeCase:
    case: SecondEigenvalueCase
    threshold: float
    first_increasing_level: int

    def to_dict(self) -> dict[str, object]:
        return {
            "case": self.case.value,
            "threshold": self.threshold,
            "first_increasing_level": self.first_increasing_level,
        }


def second_eigenvalue_case(spec: ScalingSpectrum, q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DerivativeCase:
    """Compare α₁ with the weighted mean exponent ⟨α⟩ = Σ n_i α_i q^{α_i} / Z̃ at q.

    Level l grows with L exactly when its exponent exceeds ⟨α⟩. When α₁ does,
    every level l >= 2 grows and the remaining cumulants follow; otherwise λ₂
    itself decreases. The vacuum weighs ⟨α⟩ below the largest kept exponent,
    so some level always grows.
    """

    q = _check_q(q)
    _, terms = z_tilde(spec, q, tail_tol)
    _, threshold = _mean_exponent(spec, q, max(terms, 1))
    first = next(
        (i + 2 for i, alpha in enumerate(spec.exponents) if alpha >= threshold),
        len(spec.exponents) + 1,
    )
    case = (
        SecondEigenvalueCase.ALL_SUBSEQUENT_INCREASING
        if spec.exponents[0] >= threshold
        else SecondEigenvalueCase.SECOND_DECREASING
    )
    return DerivativeCase(case=case, threshold=threshold, first_increasing_level=first)


__all__ = (
    "DEFAULT_TAIL_TOL",
    "DerivativeProbe",
    "DerivativeCase",
    "SecondEigenvalueCase",
    "q_of_L",
    "dq_dL",
    "z_tilde",
    "eigenvalues",
    "level_eigenvalue",
    "check_L_flow",
    "check_parameter_flow",
    "eigenvalue_derivative_probe",
    "eigenvalue_derivative",
    "second_eigenvalue_case",
)
