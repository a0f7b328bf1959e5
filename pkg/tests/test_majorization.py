"""Tests for distributions, the majorization order and flow reports."""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

from majolab.errors import (
    EmptyInput,
    NegativeWeight,
    NonMonotoneParameter,
    NotDoublyStochastic,
    NotNormalized,
    TooFewPoints,
)
from majolab.majorization import (
    FlowDirection,
    FlowLevels,
    Verdict,
    apply_doubly_stochastic,
    canonicalize,
    cumulants,
    direct_product,
    flow_report,
    majorizes,
    pure,
    random_majorized_chain,
    random_majorized_pair,
    shannon_entropy,
    uniform,
)

weights = st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=10).filter(
    lambda values: sum(values) > 1e-6
)


def test_canonicalize_sorts_descending() -> None:
    dist = canonicalize([0.2, 0.5, 0.3])

    assert dist.as_list() == [0.5, 0.3, 0.2]
    assert dist.largest == 0.5
    assert not dist.weights.flags.writeable


def test_canonicalize_clamps_tiny_negatives() -> None:
    dist = canonicalize([1.0 + 1e-13, -1e-13])

    assert dist.weights[-1] == 0.0


@pytest.mark.parametrize(
    ("raw", "error"),
    [
        ([], EmptyInput),
        ([0.5, 0.6, -0.1], NegativeWeight),
        ([0.5, 0.4], NotNormalized),
        ([float("nan"), 1.0], NotNormalized),
    ],
)
def test_canonicalize_rejects_invalid_vectors(raw: list[float], error: type[Exception]) -> None:
    with pytest.raises(error):
        canonicalize(raw)


def test_canonicalize_normalizes_on_request() -> None:
    dist = canonicalize([3.0, 1.0], normalize=True)

    assert dist.as_list() == pytest.approx([0.75, 0.25])


def test_cumulants_are_prefix_sums() -> None:
    np.testing.assert_allclose(cumulants(canonicalize([0.5, 0.3, 0.2])), [0.5, 0.8, 1.0])


def test_uniform_is_majorized_by_pure() -> None:
    report = majorizes(uniform(3), pure(3))

    assert report.verdict is Verdict.MAJORIZED_BY
    assert report.first_violation is None
    assert majorizes(pure(3), uniform(3)).verdict is Verdict.MAJORIZES


def test_incomparable_pair_reports_first_violation() -> None:
    x = canonicalize([0.6, 0.2, 0.2])
    y = canonicalize([0.5, 0.4, 0.1])

    report = majorizes(x, y)

    assert report.verdict is Verdict.INCOMPARABLE
    assert report.first_violation == 1
    assert report.cumulant_gaps[0] == (1, pytest.approx(0.1))
    assert report.cumulant_gaps[1] == (2, pytest.approx(-0.1))


def test_different_lengths_are_zero_padded() -> None:
    x = canonicalize([0.5, 0.5])
    y = canonicalize([0.5, 0.25, 0.25])

    report = majorizes(x, y)

    assert report.verdict is Verdict.MAJORIZES
    assert len(report.cumulant_gaps) == 3


def test_equal_within_tolerance() -> None:
    x = canonicalize([0.5, 0.5])
    y = canonicalize([0.5 + 1e-14, 0.5 - 1e-14])

    assert majorizes(x, y).verdict is Verdict.EQUAL


def test_report_serializes_fixed_fields() -> None:
    payload = majorizes(uniform(2), pure(2)).to_dict()

    assert set(payload) == {"verdict", "cumulant_gaps", "first_violation", "tol"}
    assert payload["verdict"] == "majorized_by"


def test_shannon_entropy_in_nats() -> None:
    assert shannon_entropy(uniform(4)) == pytest.approx(math.log(4))
    assert shannon_entropy(pure(5)) == 0.0


def test_direct_product_of_two_modes() -> None:
    product = direct_product(canonicalize([0.5, 0.5]), canonicalize([0.75, 0.25]))

    assert product.as_list() == pytest.approx([0.375, 0.375, 0.125, 0.125])


def test_doubly_stochastic_mixing() -> None:
    cycle = np.roll(np.eye(3), 1, axis=0)
    matrix = 0.5 * np.eye(3) + 0.5 * cycle
    y = canonicalize([0.6, 0.3, 0.1])

    x = apply_doubly_stochastic(matrix, y)

    assert x.as_list() == pytest.approx([0.45, 0.35, 0.2])
    assert majorizes(x, y).x_majorized_by_y


@pytest.mark.parametrize(
    "matrix",
    [
        [[0.5, 0.5], [0.6, 0.4]],
        [[1.2, -0.2], [-0.2, 1.2]],
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    ],
)
def test_rejects_matrices_that_are_not_doubly_stochastic(matrix: list[list[float]]) -> None:
    with pytest.raises(NotDoublyStochastic):
        apply_doubly_stochastic(matrix, canonicalize([0.7, 0.3]))


def test_random_pairs_are_reproducible() -> None:
    first = random_majorized_pair(5, 3, seed=7)
    second = random_majorized_pair(5, 3, seed=7)

    np.testing.assert_array_equal(first[0].weights, second[0].weights)
    np.testing.assert_array_equal(first[1].weights, second[1].weights)


def test_random_chain_runs_from_mixed_to_ordered() -> None:
    chain = random_majorized_chain(6, 4, 3, seed=11)

    assert len(chain) == 4
    for before, after in zip(chain, chain[1:]):
        assert majorizes(before, after).x_majorized_by_y


def test_flow_levels_promote_weaker_levels() -> None:
    levels = FlowLevels.from_checks(False, False, True)

    assert levels.to_dict() == {"global": True, "monotonous": True, "fine_grained": True}


def test_flow_levels_reject_inconsistent_combinations() -> None:
    with pytest.raises(ValueError):
        FlowLevels(global_=True, monotonous=False, fine_grained=True)


def test_flow_report_descending_direction() -> None:
    report = flow_report([(1.0, pure(2)), (2.0, uniform(2))], FlowDirection.DESCENDING_MAJORIZES)

    assert report.fine_grained
    assert report.levels.global_
    assert report.violations() == []
    assert report.entropies[1] == pytest.approx(math.log(2))


def test_flow_report_flags_wrong_direction() -> None:
    report = flow_report([(1.0, pure(2)), (2.0, uniform(2))], FlowDirection.ASCENDING_MAJORIZES)

    assert not report.fine_grained
    assert not report.levels.monotonous
    assert not report.levels.global_
    assert [(pair.lower, pair.upper) for pair in report.violations()] == [(0, 1)]


def test_flow_report_accepts_descending_parameters() -> None:
    mixed = canonicalize([0.6, 0.4])
    report = flow_report([(3.0, uniform(2)), (2.0, mixed), (1.0, pure(2))], FlowDirection.DESCENDING_MAJORIZES)

    assert report.points == (1.0, 2.0, 3.0)
    assert report.fine_grained
    assert report.adjacent(1).report.verdict is Verdict.MAJORIZES
    assert report.entropy_strict


def test_flow_report_records_ties() -> None:
    report = flow_report([(0.0, uniform(3)), (1.0, uniform(3))], FlowDirection.ASCENDING_MAJORIZES)

    assert report.ties == (0,)
    assert report.pairwise[0].report.verdict is Verdict.EQUAL
    assert report.fine_grained
    assert not report.entropy_strict


def test_flow_report_input_errors() -> None:
    with pytest.raises(TooFewPoints):
        flow_report([(0.0, pure(2))], FlowDirection.ASCENDING_MAJORIZES)
    with pytest.raises(NonMonotoneParameter):
        flow_report([(0.0, pure(2)), (1.0, pure(2)), (0.5, pure(2))], FlowDirection.ASCENDING_MAJORIZES)


def test_flow_report_serializes_levels() -> None:
    payload = flow_report([(1.0, pure(2)), (2.0, uniform(2))], FlowDirection.DESCENDING_MAJORIZES).to_dict()

    assert payload["levels"] == {"global": True, "monotonous": True, "fine_grained": True}
    assert payload["pairwise"][0]["verdict"] == "majorizes"
    assert payload["pairwise"][0]["holds"] is True


@given(weights)
def test_reflexive(raw: list[float]) -> None:
    x = canonicalize(raw, normalize=True)

    assert majorizes(x, x).verdict is Verdict.EQUAL


@given(weights)
def test_uniform_and_pure_bound_every_distribution(raw: list[float]) -> None:
    x = canonicalize(raw, normalize=True)
    n = len(x)

    assert majorizes(uniform(n), x).x_majorized_by_y
    assert majorizes(x, pure(n)).x_majorized_by_y


@given(weights)
def test_canonical_form_is_idempotent(raw: list[float]) -> None:
    x = canonicalize(raw, normalize=True)

    np.testing.assert_array_equal(canonicalize(x.weights).weights, x.weights)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=2**32 - 1))
def test_doubly_stochastic_pairs_obey_schur_concavity(n: int, mixing: int, seed: int) -> None:
    x, y = random_majorized_pair(n, mixing, seed)

    assert majorizes(x, y).x_majorized_by_y
    assert shannon_entropy(x) >= shannon_entropy(y) - 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_direct_product_lemma(seed: int) -> None:
    rng = np.random.default_rng(seed)
    x1, y1 = random_majorized_pair(3, 2, rng)
    x2, y2 = random_majorized_pair(4, 3, rng)

    assert majorizes(direct_product(x1, x2), direct_product(y1, y2)).x_majorized_by_y
