"""
test_spectra.py
===============

Tests for eigenvalues, empirical spectral distributions and Stieltjes
transforms.
"""

import math

import numpy as np
import pytest

import martspec  # pylint: disable=import-error
from martspec import spectra  # pylint: disable=import-error
from martspec.field import RngStream  # pylint: disable=import-error


def _random_wigner(n: int, seed: int = 0):
    field = martspec.field.gen_gaussian_field(n, rng=RngStream(seed))
    return martspec.build_wigner(field)


def test_eigenvalues_trivial() -> None:
    """Test eigenvalues of a diagonal and a swap matrix."""
    s = martspec.eigenvalues(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(s.values, [-1.0, 2.0, 3.0])
    s = martspec.eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(s.values, [-1.0, 1.0])


def test_eigenvalue_traces() -> None:
    """Test the first two trace identities."""
    M = _random_wigner(30)
    s = martspec.eigenvalues(M)
    assert np.all(np.diff(s.values) >= 0)
    assert math.isclose(np.sum(s.values), np.trace(M.data), abs_tol=1e-10)
    assert math.isclose(
        np.sum(s.values**2), M.frobenius_norm() ** 2, rel_tol=1e-10
    )


def test_spectral_sample_rejects() -> None:
    """Test that empty, unsorted and non-finite samples are rejected."""
    with pytest.raises(ValueError):
        spectra.SpectralSample(np.array([]))
    with pytest.raises(ValueError):
        spectra.SpectralSample(np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        spectra.SpectralSample(np.array([0.0, np.inf]))


def test_esd_trivial() -> None:
    """Test the right-continuous empirical distribution with multiplicity."""
    F = martspec.esd(spectra.SpectralSample(np.array([0.0, 0.0, 1.0])))
    assert F(-0.5) == 0.0
    assert math.isclose(F(0.0), 2 / 3)
    assert math.isclose(F(0.5), 2 / 3)
    assert F(1.0) == 1.0
    assert F.left_limit(0.0) == 0.0
    assert math.isclose(F.left_limit(1.0), 2 / 3)


def test_esd_monotone() -> None:
    """Test monotonicity and the limits at the ends."""
    F = martspec.esd(martspec.eigenvalues(_random_wigner(40)))
    t = np.linspace(-5, 5, 1001)
    values = F(t)
    assert np.all(np.diff(values) >= 0)
    assert values[0] == 0.0 and values[-1] == 1.0


def test_step_quantile() -> None:
    """Test the generalized inverse of a step distribution."""
    F = martspec.esd(spectra.SpectralSample(np.array([-1.0, 0.0, 2.0, 5.0])))
    assert F.quantile(0.25) == -1.0
    assert F.quantile(0.26) == 0.0
    assert F.quantile(1.0) == 5.0
    with pytest.raises(ValueError):
        F.quantile(1.5)


def test_stieltjes_trivial() -> None:
    """Test the transform of a point mass at zero."""
    s = spectra.SpectralSample(np.array([0.0]))
    assert martspec.stieltjes_from_eigs(s, 1j) == pytest.approx(1j)
    assert martspec.stieltjes_from_eigs(s, 2j) == pytest.approx(0.5j)


def test_stieltjes_herglotz() -> None:
    """Test Im S > 0 and |S| <= 1 / Im z on random spectra."""
    s = martspec.eigenvalues(_random_wigner(50, seed=3))
    for z in [0.1j, 1 + 0.01j, -3 + 2j, 0.5 + 0.2j]:
        S = martspec.stieltjes_from_eigs(s, z)
        assert S.imag > 0
        assert abs(S) <= 1 / z.imag + 1e-12


def test_stieltjes_vectorized() -> None:
    """Test that array arguments agree with scalar calls."""
    s = martspec.eigenvalues(_random_wigner(10))
    z = np.array([1j, 0.5 + 0.1j, -1 + 2j])
    batch = martspec.stieltjes_from_eigs(s, z)
    for k, w in enumerate(z):
        assert batch[k] == pytest.approx(martspec.stieltjes_from_eigs(s, w))


def test_stieltjes_rejects_real_axis() -> None:
    """Test that Im z <= 0 is rejected."""
    s = spectra.SpectralSample(np.array([0.0]))
    with pytest.raises(ValueError):
        martspec.stieltjes_from_eigs(s, 1.0)
    with pytest.raises(ValueError):
        martspec.stieltjes_resolvent(np.eye(2), 1 - 1j)


def test_resolvent_route() -> None:
    """Test the resolvent trace against the eigenvalue route."""
    M = _random_wigner(20, seed=7)
    s = martspec.eigenvalues(M)
    for z in [1j, 0.3 + 0.05j, -1.7 + 0.5j]:
        direct = martspec.stieltjes_from_eigs(s, z)
        assert abs(martspec.stieltjes_resolvent(M, z) - direct) < 1e-10


def test_resolvent_identity() -> None:
    """Test (1/n) Tr (I - zI)^{-1} = 1 / (1 - z)."""
    z = 0.5 + 1j
    assert martspec.stieltjes_resolvent(np.eye(5), z) == pytest.approx(
        1 / (1 - z)
    )


def test_density_recover() -> None:
    """Test that Stieltjes inversion recovers the semicircle density."""
    law = martspec.semicircle()
    grid = np.array([-1.0, 0.0, 1.0])
    f = spectra.density_recover(law.stieltjes, grid, v=1e-3)
    assert f[1] == pytest.approx(1 / math.pi, abs=1e-3)
    assert np.allclose(f, law.density(grid), atol=1e-3)


def test_density_recover_rejects() -> None:
    """Test that a non-positive inversion height is rejected."""
    law = martspec.semicircle()
    with pytest.raises(ValueError):
        spectra.density_recover(law.stieltjes, np.zeros(1), v=0.0)
    with pytest.raises(ValueError):
        spectra.density_recover(law.stieltjes, np.zeros(1), v=-0.1)


def test_density_grid() -> None:
    """Test the padded grid over a support."""
    s = spectra.SpectralSample(np.array([-1.0, 3.0]))
    grid = spectra.density_grid(s, points=5, pad=1.0)
    assert np.allclose(grid, [-2.0, -0.5, 1.0, 2.5, 4.0])


@pytest.mark.slow
def test_resolvent_route_sweep() -> None:
    """Test both routes on 50 matrices of order up to 32, ten z each."""
    rng = RngStream(11)
    orders = rng.generator.integers(1, 33, 50)
    for k, n in enumerate(orders):
        M = _random_wigner(int(n), seed=100 + k)
        s = martspec.eigenvalues(M)
        zs = rng.uniform(-3, 3, 10) + 1j * rng.uniform(0.01, 2, 10)
        for z in zs:
            direct = martspec.stieltjes_from_eigs(s, z)
            via_solve = martspec.stieltjes_resolvent(M, z)
            assert abs(via_solve - direct) <= 1e-9 * abs(direct)
