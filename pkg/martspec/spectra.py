"""
Module for spectra of symmetric matrices: eigenvalues, empirical spectral
distributions and Stieltjes transforms.

The Stieltjes transform S(z) = (1/n) sum_k 1/(lambda_k - z) is computed by
two independent routes: from the eigenvalues, and from complex linear solves
of the resolvent (M - zI)^{-1} against the identity. The second route costs
O(n^4) in total and serves as an oracle for small matrices. Densities are
recovered by Stieltjes inversion, f(x) ~ Im S(x + iv) / pi.
"""

from __future__ import annotations

from logging import Logger
from typing import TYPE_CHECKING, Any, Callable, Optional, Union

import numpy as np

from .log_config import get_logger

if TYPE_CHECKING:
    from .matrix_build import SymMatrix

# default inversion height and grid
DEFAULT_INVERSION_HEIGHT = 0.01
DEFAULT_GRID_POINTS = 2001
DEFAULT_GRID_PAD = 0.5

# resolvent residual tolerance, relative to the matrix order
RESOLVENT_TOL = 1e-8


class SpectrumError(RuntimeError):
    """The eigensolver or the resolvent solve failed."""


def check_upper(z: complex) -> complex:
    """Returns z as a complex number, rejecting Im z <= 0."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"Stieltjes transforms need Im z > 0, got z = {z}.")
    return z


class SpectralSample:
    """Ascending eigenvalues of a matrix of order n."""

    values: np.ndarray
    n: int

    def __init__(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("Eigenvalues must be a non-empty vector.")
        if not np.all(np.isfinite(values)):
            raise ValueError("Eigenvalues must be finite.")
        if np.any(np.diff(values) < 0):
            raise ValueError("Eigenvalues must be sorted ascending.")
        self.values = values
        self.n = len(values)

    def __repr__(self) -> str:
        return (
            f"SpectralSample(n={self.n}, "
            + f"range=[{self.values[0]:.4g}, {self.values[-1]:.4g}])"
        )

    def __len__(self) -> int:
        return self.n

    @property
    def support(self) -> tuple[float, float]:
        """Smallest and largest eigenvalue."""
        return float(self.values[0]), float(self.values[-1])


def eigenvalues(
    M: Union[SymMatrix, np.ndarray], logger: Optional[Logger] = None
) -> SpectralSample:
    """
    All eigenvalues of a symmetric matrix, ascending, from LAPACK's symmetric
    tridiagonal reduction (numpy.linalg.eigvalsh). Covariance matrices with
    more rows than columns use their exchanged Gram matrix plus exact zeros.
    """
    companion = getattr(M, "companion", None)
    data = getattr(M, "data", M)
    try:
        if companion is not None:
            n_zeros = data.shape[0] - companion.shape[0]
            values = np.concatenate(
                [np.zeros(n_zeros), np.linalg.eigvalsh(companion)]
            )
            values.sort()
        else:
            values = np.linalg.eigvalsh(np.asarray(data, dtype=float))
    except np.linalg.LinAlgError as e:
        msg = f"eigensolver failed to converge: {e}"
        get_logger(logger).error(msg)
        raise SpectrumError(msg) from e
    return SpectralSample(values)


class StepCDF:
    """
    A right-continuous step distribution function with jumps at sorted
    points; cumulative weights end at one.
    """

    points: np.ndarray
    cumulative: np.ndarray

    def __init__(
        self, points: np.ndarray, weights: Optional[np.ndarray] = None
    ) -> None:
        points = np.asarray(points, dtype=float)
        if points.ndim != 1 or len(points) == 0:
            raise ValueError("A step CDF needs at least one jump point.")
        if weights is None:
            weights = np.full(len(points), 1 / len(points))
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0):
            raise ValueError("Jump weights must be non-negative.")
        if abs(weights.sum() - 1) > 1e-12:
            raise ValueError(f"Jump weights sum to {weights.sum()}, not 1.")
        # merge multiplicities
        order = np.argsort(points, kind="stable")
        unique, inverse = np.unique(points[order], return_inverse=True)
        merged = np.zeros(len(unique))
        np.add.at(merged, inverse, weights[order])
        self.points = unique
        self.cumulative = np.cumsum(merged)
        self.cumulative[-1] = 1.0

    def __repr__(self) -> str:
        return f"StepCDF(jumps={len(self.points)})"

    def __call__(self, t: Any) -> Any:
        """F(t), vectorized over t."""
        idx = np.searchsorted(self.points, t, side="right")
        out = np.where(idx > 0, self.cumulative[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def left_limit(self, t: Any) -> Any:
        """F(t-), vectorized over t."""
        idx = np.searchsorted(self.points, t, side="left")
        out = np.where(idx > 0, self.cumulative[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q: Any) -> Any:
        """The generalized inverse inf{t : F(t) >= q}, vectorized over q."""
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise ValueError("Quantile levels must lie in [0, 1].")
        idx = np.searchsorted(self.cumulative, q - 1e-14, side="left")
        out = self.points[np.minimum(idx, len(self.points) - 1)]
        return float(out) if np.ndim(out) == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        """First and last jump point."""
        return float(self.points[0]), float(self.points[-1])

    def breakpoints(self) -> np.ndarray:
        """The jump points."""
        return self.points

    def rows(self) -> list[tuple[float, float]]:
        """CSV rows (t, F(t)) at the jump points."""
        return list(zip(self.points.tolist(), self.cumulative.tolist()))


def esd(s: SpectralSample) -> StepCDF:
    """The empirical spectral distribution: mass 1/n at each eigenvalue."""
    return StepCDF(s.values)


def stieltjes_from_eigs(
    s: Union[SpectralSample, np.ndarray], z: Any
) -> Any:
    """
    (1/n) sum_k 1/(lambda_k - z), for a scalar z or an array of points in the
    upper half-plane.
    """
    values = s.values if isinstance(s, SpectralSample) else np.asarray(s)
    if np.ndim(z) == 0:
        z = check_upper(z)
        return complex(np.mean(1 / (values - z)))
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("Stieltjes transforms need Im z > 0.")
    return np.mean(1 / (values[:, None] - z.ravel()[None, :]), axis=0).reshape(
        z.shape
    )


def stieltjes_resolvent(
    M: Union[SymMatrix, np.ndarray],
    z: complex,
    logger: Optional[Logger] = None,
) -> complex:
    """
    (1/n) Tr (M - zI)^{-1} from LU solves with partial pivoting against the
    identity columns. Raises SpectrumError when the solve residual exceeds
    the tolerance.
    """
    z = check_upper(z)
    data = np.asarray(getattr(M, "data", M), dtype=float)
    n = data.shape[0]
    shifted = data - z * np.eye(n)
    identity = np.eye(n, dtype=complex)
    try:
        R = np.linalg.solve(shifted, identity)
    except np.linalg.LinAlgError as e:
        msg = f"resolvent solve failed at z = {z}: {e}"
        get_logger(logger).error(msg)
        raise SpectrumError(msg) from e
    residual = float(np.max(np.abs(shifted @ R - identity)))
    if residual > RESOLVENT_TOL * max(1, n):
        msg = f"resolvent residual {residual:.3e} above tolerance at z = {z}"
        get_logger(logger).error(msg)
        raise SpectrumError(msg)
    return complex(np.trace(R) / n)


def density_recover(
    S: Callable[[complex], complex],
    grid: np.ndarray,
    v: float = DEFAULT_INVERSION_HEIGHT,
) -> np.ndarray:
    """Im S(x + iv) / pi at each grid point x."""
    if not v > 0:
        raise ValueError(f"Inversion height must be positive, got {v}.")
    grid = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("Inversion grid must be finite.")
    return np.array([S(complex(x, v)).imag / np.pi for x in grid])


def density_grid(
    sample_or_law: Any,
    points: int = DEFAULT_GRID_POINTS,
    pad: float = DEFAULT_GRID_PAD,
) -> np.ndarray:
    """
    An evenly spaced grid over the support of a spectral sample or a law,
    padded by pad on each side.
    """
    lo, hi = sample_or_law.support
    return np.linspace(lo - pad, hi + pad, points)
