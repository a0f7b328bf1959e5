"""Tests for CFT eigenvalue towers and their L and parameter flows."""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

from majolab import cft
from majolab.cft import SecondEigenvalueCase
from majolab.errors import (
    BlockTooSmall,
    HypothesisViolated,
    ModelInvariantViolation,
    NonMonotoneParameter,
    QOutOfRange,
    StepLeavesDomain,
)
from majolab.majorization import FlowDirection, Verdict
from majolab.schemas import CFTFlowParams, QFlow, ScalingSpectrum, load_spectrum_document

DEFAULTS = CFTFlowParams()


@pytest.fixture
def ising() -> ScalingSpectrum:
    payload = json.loads((ROOT / "data" / "ising.json").read_text(encoding="utf-8"))
    spectrum, params = load_spectrum_document(payload)
    assert params == DEFAULTS
    return spectrum


def tower(exponents: tuple[float, ...], degeneracies: tuple[int, ...]) -> ScalingSpectrum:
    return ScalingSpectrum(exponents=exponents, degeneracies=degeneracies)


def test_q_of_L() -> None:
    assert cft.q_of_L(math.e, DEFAULTS) == pytest.approx(0.00186744, abs=1e-8)
    assert cft.q_of_L(16.0, DEFAULTS) < cft.q_of_L(64.0, DEFAULTS) < 1.0


def test_q_of_L_needs_block_above_cutoff() -> None:
    with pytest.raises(BlockTooSmall):
        cft.q_of_L(1.0, DEFAULTS)
    with pytest.raises(BlockTooSmall):
        cft.q_of_L(2.0, CFTFlowParams(uv_cutoff=3.0))


def test_dq_dL_matches_finite_difference() -> None:
    params = CFTFlowParams(kappa=0.7, uv_cutoff=0.5)
    h = 1e-5
    numeric = (cft.q_of_L(12.0 + h, params) - cft.q_of_L(12.0 - h, params)) / (2 * h)

    assert cft.dq_dL(12.0, params) == pytest.approx(numeric, rel=1e-7)


def test_z_tilde_examples() -> None:
    assert cft.z_tilde(tower((1.0, 2.0), (1, 1)), 0.1) == (pytest.approx(1.11), 2)
    assert cft.z_tilde(tower((0.5,), (2,)), 0.5)[0] == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-6)
    assert cft.z_tilde(tower((1.0,), (1,)), 0.0) == (1.0, 0)


def test_z_tilde_stops_at_negligible_levels() -> None:
    total, used = cft.z_tilde(tower((1.0, 40.0), (1, 1)), 0.1, tail_tol=1e-14)

    assert used == 1
    assert total == pytest.approx(1.1)


def test_eigenvalues_replicate_degeneracies() -> None:
    dist = cft.eigenvalues(tower((1.0, 2.0), (1, 1)), 0.1)
    degenerate = cft.eigenvalues(tower((1.0,), (3,)), 0.2)

    assert dist.as_list() == pytest.approx([0.900901, 0.0900901, 0.00900901], abs=1e-6)
    assert degenerate.as_list() == pytest.approx([0.625, 0.125, 0.125, 0.125])


def test_eigenvalues_with_fixed_term_count() -> None:
    dist = cft.eigenvalues(tower((1.0, 2.0), (1, 1)), 0.1, terms=1)

    assert dist.as_list() == pytest.approx([1 / 1.1, 0.1 / 1.1])


@pytest.mark.parametrize("q", [1.0, 1.5, -0.1])
def test_q_outside_unit_interval(q: float) -> None:
    with pytest.raises(QOutOfRange):
        cft.eigenvalues(tower((1.0,), (1,)), q)


def test_level_eigenvalue(ising: ScalingSpectrum) -> None:
    q = cft.q_of_L(8.0, DEFAULTS)
    dist = cft.eigenvalues(ising, q)

    assert cft.level_eigenvalue(ising, q, 1) == pytest.approx(dist.largest)
    assert cft.level_eigenvalue(ising, q, 2) == pytest.approx(dist.weights[1])


def test_ising_block_flow_is_fine_grained(ising: ScalingSpectrum) -> None:
    grid = [2.0**k for k in range(1, 9)]
    report = cft.check_L_flow(ising, DEFAULTS, grid)

    assert report.direction is FlowDirection.DESCENDING_MAJORIZES
    assert report.fine_grained
    assert all(b > a for a, b in zip(report.entropies, report.entropies[1:]))
    assert len({len(dist) for dist in report.distributions}) == 1


def test_ising_pair_verdict(ising: ScalingSpectrum) -> None:
    report = cft.check_L_flow(ising, DEFAULTS, [4.0, 16.0])

    assert report.adjacent(0).report.verdict is Verdict.MAJORIZES
    assert report.adjacent(0).holds


def test_frozen_tower_is_constant() -> None:
    frozen = tower((50.0,), (1,))
    report = cft.check_L_flow(frozen, DEFAULTS, [4.0, 16.0])

    assert report.adjacent(0).report.verdict is Verdict.EQUAL
    assert report.fine_grained
    assert cft.eigenvalue_derivative_probe(frozen, DEFAULTS, 16.0, 1) == (0, 0)


def test_L_flow_needs_increasing_grid(ising: ScalingSpectrum) -> None:
    with pytest.raises(NonMonotoneParameter):
        cft.check_L_flow(ising, DEFAULTS, [16.0, 4.0])
    with pytest.raises(BlockTooSmall):
        cft.check_L_flow(ising, DEFAULTS, [0.5, 4.0])


def test_parameter_flow_with_decreasing_q(ising: ScalingSpectrum) -> None:
    qflow = QFlow(samples=((0.0, 0.5), (1.0, 0.25), (2.0, 0.1)))

    report = cft.check_parameter_flow(ising, qflow)

    assert report.direction is FlowDirection.ASCENDING_MAJORIZES
    assert report.fine_grained
    assert report.entropy_strict


def test_parameter_flow_rejects_rising_q(ising: ScalingSpectrum) -> None:
    with pytest.raises(HypothesisViolated):
        cft.check_parameter_flow(ising, QFlow(samples=((0.0, 0.1), (1.0, 0.3))))


def test_parameter_flow_needs_ordered_samples(ising: ScalingSpectrum) -> None:
    with pytest.raises(NonMonotoneParameter):
        cft.check_parameter_flow(ising, QFlow(samples=((1.0, 0.3), (0.0, 0.1))))


def test_constant_q_flow_is_all_ties(ising: ScalingSpectrum) -> None:
    report = cft.check_parameter_flow(ising, QFlow(samples=((0.0, 0.3), (1.0, 0.3))))

    assert report.adjacent(0).report.verdict is Verdict.EQUAL
    assert report.ties == (0,)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_closed_form_derivative_matches_finite_difference(ising: ScalingSpectrum, level: int) -> None:
    h = 1e-4
    above = cft.level_eigenvalue(ising, cft.q_of_L(8.0 + h, DEFAULTS), level)
    below = cft.level_eigenvalue(ising, cft.q_of_L(8.0 - h, DEFAULTS), level)

    assert cft.eigenvalue_derivative(ising, DEFAULTS, 8.0, level) == pytest.approx((above - below) / (2 * h), rel=1e-6)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_probe_sign_agrees_with_closed_form(ising: ScalingSpectrum, level: int) -> None:
    probe = cft.eigenvalue_derivative_probe(ising, DEFAULTS, 8.0, level)

    assert probe.sign == int(np.sign(cft.eigenvalue_derivative(ising, DEFAULTS, 8.0, level)))
    assert probe.second_cumulant_sign == -1


@pytest.mark.parametrize("L", [2.0, 8.0, 64.0, 1024.0])
def test_level_grows_exactly_above_mean_exponent(ising: ScalingSpectrum, L: float) -> None:
    case = cft.second_eigenvalue_case(ising, cft.q_of_L(L, DEFAULTS))

    for level, alpha in enumerate(ising.exponents, start=2):
        slope = cft.eigenvalue_derivative(ising, DEFAULTS, L, level)
        assert (slope > 0) == (alpha > case.threshold)


def test_probe_must_stay_above_cutoff(ising: ScalingSpectrum) -> None:
    with pytest.raises(StepLeavesDomain):
        cft.eigenvalue_derivative_probe(ising, DEFAULTS, 1.0005, 1)


def test_second_eigenvalue_grows_for_sparse_tower() -> None:
    spec = tower((2.0, 3.0), (1, 1))
    case = cft.second_eigenvalue_case(spec, cft.q_of_L(8.0, DEFAULTS))

    assert case.case is SecondEigenvalueCase.ALL_SUBSEQUENT_INCREASING
    assert case.first_increasing_level == 2
    assert cft.eigenvalue_derivative(spec, DEFAULTS, 8.0, 2) > 0


def test_second_eigenvalue_grows_for_ising(ising: ScalingSpectrum) -> None:
    q = cft.q_of_L(8.0, DEFAULTS)
    case = cft.second_eigenvalue_case(ising, q)

    assert case.case is SecondEigenvalueCase.ALL_SUBSEQUENT_INCREASING
    assert case.first_increasing_level == 2
    assert 0.0 < case.threshold < ising.exponents[0]
    assert case.to_dict()["case"] == "all-subsequent-increasing"
    h = 1e-4
    above = cft.level_eigenvalue(ising, cft.q_of_L(8.0 + h, DEFAULTS), 2)
    below = cft.level_eigenvalue(ising, cft.q_of_L(8.0 - h, DEFAULTS), 2)
    assert above > below
    assert cft.eigenvalue_derivative(ising, DEFAULTS, 8.0, 2) > 0


def test_second_eigenvalue_decreases_below_mean_exponent() -> None:
    spec = tower((0.1, 5.0), (1, 1))
    case = cft.second_eigenvalue_case(spec, 0.9)

    expected = (0.1 * 0.9**0.1 + 5.0 * 0.9**5) / (1.0 + 0.9**0.1 + 0.9**5)
    assert case.case is SecondEigenvalueCase.SECOND_DECREASING
    assert case.threshold == pytest.approx(expected, rel=1e-12)
    assert case.first_increasing_level == 3
    assert case.to_dict()["case"] == "second-decreasing"


@pytest.mark.parametrize("exponents", [(0.1, 0.2), (0.5, 0.75, 3.0), (1.0, 1.0 + 1e-6)])
def test_some_level_always_grows(exponents: tuple[float, ...]) -> None:
    case = cft.second_eigenvalue_case(tower(exponents, (1,) * len(exponents)), 0.5)

    assert 2 <= case.first_increasing_level <= len(exponents) + 1
    assert case.threshold < exponents[-1]


def test_spectrum_document_validation() -> None:
    with pytest.raises(ModelInvariantViolation):
        load_spectrum_document({"exponents": [1.0, 0.5], "degeneracies": [1, 1]})
    with pytest.raises(ModelInvariantViolation):
        load_spectrum_document({"exponents": [1.0], "degeneracies": [1, 2]})
    with pytest.raises(ModelInvariantViolation):
        load_spectrum_document({"exponents": [1.0], "degeneracies": [1], "kappa": 0.0})
