"""Probability distributions, the majorization order and flow reports.

A `Distribution` is always held in canonical form: non-negative weights
sorted in non-increasing order that sum to one. ``x ≺ y`` ("x is majorized by
y", y is more ordered) holds when every prefix sum (cumulant) of x is at most
the matching cumulant of y. Vectors of different length are compared after
zero-padding the shorter one, which leaves its cumulants unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.special import entr

from majolab.errors import (
    EmptyInput,
    NegativeWeight,
    NonMonotoneParameter,
    NotDoublyStochastic,
    NotNormalized,
    TooFewPoints,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DOUBLY_STOCHASTIC_TOL = 1e-10


class Verdict(str, Enum):
    """Outcome of comparing x against y."""

    MAJORIZES = "majorizes"  # y ≺ x
    MAJORIZED_BY = "majorized_by"  # x ≺ y
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class FlowDirection(str, Enum):
    """Which end of a flow is expected to be the more ordered one."""

    ASCENDING_MAJORIZES = "ascending_majorizes"
    DESCENDING_MAJORIZES = "descending_majorizes"


@dataclass(frozen=True, slots=True, eq=False)
class Distribution:
    """Canonical finite probability vector; build it with `canonicalize`."""

    weights: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        if weights.ndim != 1 or weights.size == 0:
            raise EmptyInput("a distribution needs a non-empty one-dimensional weight vector")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise NegativeWeight("canonical weights must be finite and non-negative")
        if np.any(np.diff(weights) > 0.0):
            raise ValueError("canonical weights must be sorted in non-increasing order")
        slack = self.tol + weights.size * np.finfo(np.float64).eps
        if abs(weights.sum() - 1.0) > slack:
            raise NotNormalized(f"weights sum to {weights.sum()!r}, outside {slack:g} of 1")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.weights.size)

    def __iter__(self):
        return iter(self.weights.tolist())

    def __repr__(self) -> str:
        head = ", ".join(f"{w:.6g}" for w in self.weights[:6])
        tail = ", ..." if self.weights.size > 6 else ""
        return f"Distribution(({head}{tail}), n={self.weights.size})"

    @property
    def largest(self) -> float:
        return float(self.weights[0])

    def padded(self, size: int) -> np.ndarray:
        """Weights extended with zeros to ``size`` entries."""

        if size < self.weights.size:
            raise ValueError(f"cannot pad {self.weights.size} weights down to {size}")
        out = np.zeros(size, dtype=np.float64)
        out[: self.weights.size] = self.weights
        return out

    def as_list(self) -> list[float]:
        return self.weights.tolist()


def canonicalize(raw: Iterable[float] | np.ndarray, tol: float = DEFAULT_TOL, *, normalize: bool = False) -> Distribution:
    """Clamp, check (or divide by) the sum, and sort descending."""

    values = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyInput("cannot build a distribution from an empty vector")
    if not np.all(np.isfinite(values)):
        raise NotNormalized("weights must be finite")
    if np.any(values < -tol):
        worst = float(values.min())
        raise NegativeWeight(f"weight {worst!r} is below -tol ({-tol:g})")
    values = np.clip(values, 0.0, None)
    total = float(values.sum())
    if normalize:
        if total <= 0.0:
            raise NotNormalized("weights sum to zero; nothing to normalize")
        values = values / total
    elif abs(total - 1.0) > tol:
        raise NotNormalized(f"weights sum to {total!r}; pass normalize=True to rescale")
    return Distribution(np.sort(values)[::-1], tol)


def uniform(n: int) -> Distribution:
    """The maximally mixed distribution on n outcomes."""

    return canonicalize(np.full(n, 1.0 / n), normalize=True)


def pure(n: int) -> Distribution:
    """(1, 0, ..., 0) on n outcomes; it majorizes every distribution of that length."""

    values = np.zeros(n)
    values[0] = 1.0
    return canonicalize(values)


def cumulants(x: Distribution) -> np.ndarray:
    """Prefix sums of the descending weights."""

    return np.cumsum(x.weights)


@dataclass(frozen=True, slots=True, eq=False)
class MajorizationReport:
    """Cumulant-by-cumulant comparison of x against y.

    ``gaps[k-1]`` is Σᵏx − Σᵏy. ``first_violation`` is the first 1-based k at
    which x ≺ y fails (gap above tol), or None when x ≺ y holds.
    """

    verdict: Verdict
    gaps: np.ndarray
    first_violation: int | None
    tol: float

    @property
    def cumulant_gaps(self) -> list[tuple[int, float]]:
        return [(k, float(gap)) for k, gap in enumerate(self.gaps.tolist(), start=1)]

    @property
    def x_majorized_by_y(self) -> bool:
        return self.verdict in (Verdict.MAJORIZED_BY, Verdict.EQUAL)

    @property
    def y_majorized_by_x(self) -> bool:
        return self.verdict in (Verdict.MAJORIZES, Verdict.EQUAL)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "cumulant_gaps": [[k, gap] for k, gap in self.cumulant_gaps],
            "first_violation": self.first_violation,
            "tol": self.tol,
        }


def majorizes(x: Distribution, y: Distribution, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Compare x against y; MAJORIZED_BY means x ≺ y within tol."""

    size = max(len(x), len(y))
    gaps = np.cumsum(x.padded(size)) - np.cumsum(y.padded(size))
    below = bool(np.all(gaps <= tol))
    above = bool(np.all(gaps >= -tol))
    if below and above:
        verdict = Verdict.EQUAL
    elif below:
        verdict = Verdict.MAJORIZED_BY
    elif above:
        verdict = Verdict.MAJORIZES
    else:
        verdict = Verdict.INCOMPARABLE
    violations = np.flatnonzero(gaps > tol)
    first = int(violations[0]) + 1 if violations.size else None
    gaps.setflags(write=False)
    return MajorizationReport(verdict=verdict, gaps=gaps, first_violation=first, tol=tol)


def shannon_entropy(x: Distribution) -> float:
    """−Σ p ln p in nats, with 0 ln 0 = 0."""

    return float(np.sum(entr(x.weights)))


def direct_product(p: Distribution, q: Distribution) -> Distribution:
    """Distribution of the independent pair: all pairwise products, re-canonicalized."""

    return canonicalize(np.outer(p.weights, q.weights).ravel(), max(p.tol, q.tol), normalize=True)


def apply_doubly_stochastic(
    matrix: Sequence[Sequence[float]] | np.ndarray,
    y: Distribution,
    tol: float = DOUBLY_STOCHASTIC_TOL,
) -> Distribution:
    """Return D·y, canonicalized. A doubly stochastic D guarantees D·y ≺ y."""

    d = np.asarray(matrix, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotDoublyStochastic(f"expected a square matrix, got shape {d.shape}")
    if d.shape[0] != len(y):
        raise NotDoublyStochastic(f"matrix dimension {d.shape[0]} does not match distribution length {len(y)}")
    if np.any(d < -tol):
        raise NotDoublyStochastic("matrix has negative entries")
    rows = np.abs(d.sum(axis=1) - 1.0)
    cols = np.abs(d.sum(axis=0) - 1.0)
    if rows.max() > tol or cols.max() > tol:
        raise NotDoublyStochastic(
            f"row/column sums deviate from 1 by up to {max(rows.max(), cols.max()):.3g} (tol {tol:g})"
        )
    return canonicalize(d @ y.weights, y.tol, normalize=True)


def _mixing_matrix(n: int, mixing: int, rng: np.random.Generator) -> np.ndarray:
    weights = rng.dirichlet(np.ones(mixing))
    identity = np.eye(n)
    matrix = np.zeros((n, n))
    for weight in weights:
        matrix += weight * identity[rng.permutation(n)]
    return matrix


def random_majorized_pair(
    n: int, mixing: int, seed: int | np.random.Generator
) -> tuple[Distribution, Distribution]:
    """Random y and x = (Σ pⱼ Pⱼ) y, so x ≺ y by construction.

    ``seed`` may be an integer or a `numpy.random.Generator`; a generator is
    consumed in place, so the same generator yields a fresh pair per call.
    """

    if n < 1 or mixing < 1:
        raise ValueError(f"need n >= 1 and mixing >= 1, got n={n}, mixing={mixing}")
    rng = np.random.default_rng(seed)
    y = canonicalize(rng.dirichlet(np.ones(n)), normalize=True)
    x = apply_doubly_stochastic(_mixing_matrix(n, mixing, rng), y)
    return x, y


def random_majorized_chain(
    n: int, length: int, mixing: int, seed: int | np.random.Generator
) -> list[Distribution]:
    """``length`` distributions, each majorized by the next one."""

    rng = np.random.default_rng(seed)
    chain = [canonicalize(rng.dirichlet(np.ones(n)), normalize=True)]
    for _ in range(length - 1):
        chain.append(apply_doubly_stochastic(_mixing_matrix(n, mixing, rng), chain[-1]))
    return chain[::-1]


@dataclass(frozen=True, slots=True)
class FlowLevels:
    """Three-level loss hierarchy; a stronger level implies the weaker ones."""

    global_: bool
    monotonous: bool
    fine_grained: bool

    def __post_init__(self) -> None:
        if self.fine_grained and not self.monotonous:
            raise ValueError("fine-grained loss implies monotonous loss")
        if self.monotonous and not self.global_:
            raise ValueError("monotonous loss implies global loss")

    @classmethod
    def from_checks(cls, global_ok: bool, monotone_ok: bool, fine_ok: bool) -> "FlowLevels":
        # Majorization along the whole flow proves entropy monotonicity (Schur-concavity),
        # which in turn proves the endpoint inequality.
        monotonous = monotone_ok or fine_ok
        return cls(global_=global_ok or monotonous, monotonous=monotonous, fine_grained=fine_ok)

    def to_dict(self) -> dict[str, bool]:
        return {"global": self.global_, "monotonous": self.monotonous, "fine_grained": self.fine_grained}


@dataclass(frozen=True, slots=True, eq=False)
class PairwiseReport:
    """Comparison of the distribution at ``lower`` (smaller parameter) against ``upper``."""

    lower: int
    upper: int
    report: MajorizationReport
    holds: bool


@dataclass(frozen=True, slots=True, eq=False)
class FlowReport:
    """Entropies, pairwise majorization and loss levels along a flow (ascending parameter order)."""

    points: tuple[float, ...]
    distributions: tuple[Distribution, ...]
    entropies: tuple[float, ...]
    pairwise: tuple[PairwiseReport, ...]
    levels: FlowLevels
    direction: FlowDirection
    tol: float
    ties: tuple[int, ...] = ()
    entropy_anomalies: tuple[int, ...] = field(default=())

    @property
    def fine_grained(self) -> bool:
        return self.levels.fine_grained

    def violations(self) -> list[PairwiseReport]:
        return [pair for pair in self.pairwise if not pair.holds]

    def adjacent(self, index: int) -> PairwiseReport:
        """Report for the pair (index, index + 1)."""

        for pair in self.pairwise:
            if pair.lower == index and pair.upper == index + 1:
                return pair
        raise IndexError(index)

    @property
    def entropy_strict(self) -> bool:
        """True when entropy changes strictly (beyond the tie tolerance) between every adjacent pair."""

        return not self.ties and self.levels.monotonous

    def to_dict(self) -> dict[str, Any]:
        return {
            "direction": self.direction.value,
            "points": list(self.points),
            "entropies": list(self.entropies),
            "levels": self.levels.to_dict(),
            "ties": list(self.ties),
            "entropy_anomalies": list(self.entropy_anomalies),
            "tol": self.tol,
            "pairwise": [
                {"lower": pair.lower, "upper": pair.upper, "holds": pair.holds, **pair.report.to_dict()}
                for pair in self.pairwise
            ],
        }


def _item(point: Any) -> tuple[float, Distribution]:
    return float(point[0]), point[1]


def flow_report(
    points: Sequence[Any],
    direction: FlowDirection,
    tol: float = DEFAULT_TOL,
    entropy_tol: float = DEFAULT_TOL,
) -> FlowReport:
    """Check global, monotonous and fine-grained loss along ``(param, Distribution)`` points.

    ASCENDING_MAJORIZES expects ρ(t₁) ≺ ρ(t₂) whenever t₂ > t₁;
    DESCENDING_MAJORIZES expects the reverse. Entropy comparisons are
    non-strict; adjacent entropies equal within ``entropy_tol`` are listed
    in ``ties``.
    """

    if len(points) < 2:
        raise TooFewPoints(f"a flow needs at least two points, got {len(points)}")
    items = [_item(point) for point in points]
    params = np.array([param for param, _ in items])
    steps = np.diff(params)
    if np.all(steps < 0):
        items = items[::-1]
        params = params[::-1]
    elif not np.all(steps > 0):
        raise NonMonotoneParameter(f"flow parameters must be strictly monotone, got {params.tolist()}")

    dists = tuple(dist for _, dist in items)
    entropies = tuple(shannon_entropy(dist) for dist in dists)
    ascending = direction is FlowDirection.ASCENDING_MAJORIZES

    pairwise: list[PairwiseReport] = []
    for i, j in combinations(range(len(dists)), 2):
        report = majorizes(dists[i], dists[j], tol)
        holds = report.x_majorized_by_y if ascending else report.y_majorized_by_x
        pairwise.append(PairwiseReport(lower=i, upper=j, report=report, holds=holds))
    fine_ok = all(pair.holds for pair in pairwise)

    # Entropy loss towards the ordered end: decreasing with t for ascending flows.
    sign = -1.0 if ascending else 1.0
    changes = sign * np.diff(entropies)
    monotone_ok = bool(np.all(changes >= -entropy_tol))
    global_ok = bool(sign * (entropies[-1] - entropies[0]) >= -entropy_tol)
    levels = FlowLevels.from_checks(global_ok, monotone_ok, fine_ok)
    ties = tuple(int(i) for i in np.flatnonzero(np.abs(np.diff(entropies)) <= entropy_tol))
    anomalies = tuple(int(i) for i in np.flatnonzero(changes < -entropy_tol))
    if anomalies and fine_ok:
        logger.warning("entropy steps %s disagree with a fine-grained flow beyond %.1e", anomalies, entropy_tol)
    logger.debug(
        "flow over %d points: fine_grained=%s monotonous=%s global=%s", len(dists), fine_ok, monotone_ok, global_ok
    )

    return FlowReport(
        points=tuple(float(p) for p in params),
        distributions=dists,
        entropies=entropies,
        pairwise=tuple(pairwise),
        levels=levels,
        direction=direction,
        tol=tol,
        ties=ties,
        entropy_anomalies=anomalies,
    )


__all__ = (
    "DEFAULT_TOL",
    "Verdict",
    "FlowDirection",
    "Distribution",
    "MajorizationReport",
    "FlowLevels",
    "PairwiseReport",
    "FlowReport",
    "canonicalize",
    "uniform",
    "pure",
    "cumulants",
    "majorizes",
    "shannon_entropy",
    "direct_product",
    "apply_doubly_stochastic",
    "random_majorized_pair",
    "random_majorized_chain",
    "flow_report",
)
