"""
test_metrics.py
===============

Tests for the Levy and Kolmogorov distances.
"""

import numpy as np
import pytest

import martspec  # pylint: disable=import-error
from martspec.diagnostics import (  # pylint: disable=import-error
    kolmogorov_distance,
    levy_distance,
)
from martspec.field import RngStream  # pylint: disable=import-error
from martspec.spectra import StepCDF  # pylint: disable=import-error

LEVY_SLACK = 2e-6


def _random_step(rng: RngStream) -> StepCDF:
    size = int(rng.generator.integers(1, 12))
    points = rng.uniform(-2, 2, size)
    weights = rng.uniform(0, 1, size) + 0.01
    return StepCDF(points, weights / weights.sum())


def test_levy_identical() -> None:
    """Test d(F, F) = 0 for step and smooth inputs."""
    F = StepCDF(np.array([-1.0, 0.5, 2.0]))
    assert levy_distance(F, F) == 0.0
    law = martspec.semicircle()
    assert levy_distance(law, law) == 0.0


def test_levy_point_masses() -> None:
    """Test d(delta_0, delta_a) = min(a, 1)."""
    delta0 = StepCDF(np.array([0.0]))
    assert levy_distance(delta0, StepCDF(np.array([0.5]))) == pytest.approx(
        0.5, abs=1e-6
    )
    assert levy_distance(delta0, StepCDF(np.array([0.25]))) == pytest.approx(
        0.25, abs=1e-6
    )
    assert levy_distance(delta0, StepCDF(np.array([3.0]))) == pytest.approx(
        1.0, abs=1e-6
    )


def test_levy_symmetric() -> None:
    """Test d(F, G) = d(G, F) on random step distributions."""
    rng = RngStream(11)
    for _ in range(50):
        F, G = _random_step(rng), _random_step(rng)
        assert levy_distance(F, G) == pytest.approx(
            levy_distance(G, F), abs=LEVY_SLACK
        )


def test_levy_below_kolmogorov() -> None:
    """Test levy <= kolmogorov on random pairs."""
    rng = RngStream(12)
    for _ in range(100):
        F, G = _random_step(rng), _random_step(rng)
        assert levy_distance(F, G) <= kolmogorov_distance(F, G) + LEVY_SLACK


def test_levy_triangle() -> None:
    """Test the triangle inequality on random triples."""
    rng = RngStream(13)
    for _ in range(100):
        F, G, H = _random_step(rng), _random_step(rng), _random_step(rng)
        assert levy_distance(F, H) <= (
            levy_distance(F, G) + levy_distance(G, H) + LEVY_SLACK
        )


def test_kolmogorov_trivial() -> None:
    """Test identical inputs and disjoint point masses."""
    F = StepCDF(np.array([0.0]))
    assert kolmogorov_distance(F, F) == 0.0
    assert kolmogorov_distance(F, StepCDF(np.array([1.0]))) == 1.0


def test_kolmogorov_multiplicity() -> None:
    """Test a breakpoint scan with a repeated eigenvalue against a grid."""
    F = StepCDF(np.array([-1.0, 1.0]))
    G = StepCDF(np.array([-1.0, 1.0, 1.0]))
    assert kolmogorov_distance(F, G) == pytest.approx(1 / 6)
    t = np.linspace(-3, 3, 60_001)
    assert kolmogorov_distance(F, G) >= np.max(np.abs(F(t) - G(t))) - 1e-12


def test_kolmogorov_atom() -> None:
    """Test a step function against a law with an atom at the origin."""
    F = StepCDF(np.array([0.0]))
    law = martspec.marchenko_pastur(4.0)
    assert kolmogorov_distance(F, law) == pytest.approx(0.25, abs=1e-9)


def test_distances_to_semicircle() -> None:
    """Test that a Gaussian Wigner spectrum is close to the semicircle."""
    field = martspec.field.gen_gaussian_field(400, rng=RngStream(1))
    F = martspec.esd(martspec.eigenvalues(martspec.build_wigner(field)))
    law = martspec.semicircle()
    assert levy_distance(F, law) < 0.05
    assert kolmogorov_distance(F, law) < 0.05
    assert levy_distance(F, law) <= kolmogorov_distance(F, law) + LEVY_SLACK
