"""
test_conditions.py
==================

Tests for the Lindeberg and variance functionals and the truncation
operator.
"""

import math

import numpy as np
import pytest

import martspec  # pylint: disable=import-error
from martspec.diagnostics import (  # pylint: disable=import-error
    lindeberg_sum,
    truncate,
    truncation_effect,
    variance_bound,
    variance_deviation,
)
from martspec.field import (  # pylint: disable=import-error
    FieldSample,
    RngStream,
)


def test_lindeberg_trivial() -> None:
    """Test that bounded entries below the threshold contribute nothing."""
    field = FieldSample(np.full((9, 9), 2.9))
    assert lindeberg_sum(field, 1.0) == 0.0


def test_lindeberg_single_entry() -> None:
    """Test a single large entry: 100 / 16."""
    entries = np.zeros((4, 4))
    entries[0, 0] = 10.0
    assert lindeberg_sum(FieldSample(entries), 1.0) == pytest.approx(6.25)


def test_lindeberg_panel() -> None:
    """Test the 2 p n normalization of rectangular panels."""
    entries = np.zeros((2, 4))
    entries[1, 3] = -4.0
    field = FieldSample(entries, rectangular=True)
    assert lindeberg_sum(field, 1.0) == pytest.approx(16 / 16)


def test_panel_matches_triangle() -> None:
    """Test that equal entries score alike as a panel and as a triangle."""
    n = 8
    entries = np.full((n, n), 3.0)
    panel = FieldSample(entries, rectangular=True)
    triangle = FieldSample(np.tril(entries))
    ratio = n / (n + 1)
    assert lindeberg_sum(panel, 1.0) == pytest.approx(
        ratio * lindeberg_sum(triangle, 1.0)
    )
    assert lindeberg_sum(panel, 1.0) == pytest.approx(4.5)
    gaussian = martspec.field.gen_gaussian_panel(n, n, RngStream(0))
    assert variance_bound(gaussian) == pytest.approx(0.5)


def test_lindeberg_rejects() -> None:
    """Test that a non-positive level is rejected."""
    with pytest.raises(ValueError):
        lindeberg_sum(FieldSample(np.eye(2)), 0.0)


def test_variance_deviation() -> None:
    """Test the unit and doubled profiles."""
    n = 10
    field = martspec.field.gen_gaussian_field(n, rng=RngStream(0))
    assert variance_deviation(field) == 0.0
    assert variance_bound(field) == pytest.approx(55 / 100)
    field = martspec.field.gen_gaussian_field(
        n, variance_profile=np.full((n, n), 2.0), rng=RngStream(0)
    )
    assert variance_deviation(field) == pytest.approx(55 / 100)
    assert variance_bound(field) == pytest.approx(110 / 100)


def test_variance_deviation_sequence_profile() -> None:
    """Test a product profile against its direct evaluation."""
    n = 50
    a_sq = RngStream(4).uniform(0, 2, n)
    profile = martspec.field.sample_profile_from_sequence(n, a_sq)
    field = martspec.field.gen_gaussian_field(
        n, variance_profile=profile, rng=RngStream(1)
    )
    rows, cols = np.tril_indices(n)
    expected = np.sum(np.abs(profile[rows, cols] - 1)) / n**2
    assert variance_deviation(field) == pytest.approx(expected)


def test_variance_deviation_rejects() -> None:
    """Test that fields without a declared profile are rejected."""
    with pytest.raises(ValueError):
        variance_deviation(FieldSample(np.eye(3)))


def test_truncate_trivial() -> None:
    """Test that entries within the threshold are untouched."""
    field = martspec.field.gen_gaussian_field(30, rng=RngStream(2))
    truncated = truncate(field, 5.0)
    assert np.array_equal(truncated.entries, field.entries)
    assert truncated.provenance["truncation"] == {"eps": 5.0, "zeroed": 0}
    assert truncated.provenance["generator"] == "gaussian"


def test_truncate_single_entry() -> None:
    """Test that one entry at twice the threshold is zeroed."""
    n, eps = 16, 0.5
    entries = np.tril(np.ones((n, n)))
    entries[5, 2] = 2 * eps * math.sqrt(n)
    truncated = truncate(FieldSample(entries), eps)
    expected = entries.copy()
    expected[5, 2] = 0.0
    assert np.array_equal(truncated.entries, expected)
    assert truncated.provenance["truncation"]["zeroed"] == 1


def test_truncate_idempotent() -> None:
    """Test truncate(truncate(f)) = truncate(f) bitwise."""
    field = martspec.field.gen_gaussian_field(40, rng=RngStream(3))
    once = truncate(field, 0.2)
    twice = truncate(once, 0.2)
    assert once.provenance["truncation"]["zeroed"] > 0
    assert np.array_equal(once.entries, twice.entries)
    assert twice.provenance["truncation"]["zeroed"] == 0


def test_truncation_effect() -> None:
    """Test that the truncation effect respects the perturbation bound."""
    field = martspec.field.gen_gaussian_field(12, rng=RngStream(5))
    effect = truncation_effect(field, 0.4, 1j)
    assert effect["zeroed"] > 0
    assert 0 < effect["lhs"] <= effect["rhs"]
    effect = truncation_effect(field, 10.0, 1j)
    assert effect["zeroed"] == 0
    assert effect["lhs"] == 0.0 and effect["rhs"] == 0.0


@pytest.mark.slow
def test_lindeberg_gaussian() -> None:
    """Test the Gaussian Lindeberg sum at n = 1000 averaged over five seeds."""
    n = 1000
    values = [
        lindeberg_sum(
            martspec.field.gen_gaussian_field(n, rng=RngStream(seed)), 0.1
        )
        for seed in range(1, 6)
    ]
    assert np.mean(values) < 0.01
    field = martspec.field.gen_gaussian_field(n, rng=RngStream(1))
    assert truncate(field, 5.0).provenance["truncation"]["zeroed"] == 0
