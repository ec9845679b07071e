r"""
Module for limiting spectral laws.

- The semicircle law, density (1/2pi) sqrt(4 - x^2) on [-2, 2].
- The Marchenko-Pastur law with ratio y, density
  (1/(2 pi x y)) sqrt((c - x)(x - b)) on [b, c] with b = (1 - sqrt y)^2 and
  c = (1 + sqrt y)^2, plus an atom of mass 1 - 1/y at the origin when y > 1.
- The variance-profile limit driven by a discrete measure nu: g(z) solves
  $g = \int \lambda d\nu(\lambda) / (-z - \lambda g)$ in the upper half-plane,
  and $S(z) = \int d\nu(\lambda) / (-z - \lambda g(z))$ is the Stieltjes
  transform of the limit. The equation is solved by damped fixed-point
  iteration with a Newton fallback.
"""

from __future__ import annotations

import math
from logging import Logger
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq, fsolve

from .log_config import get_logger
from .spectra import DEFAULT_INVERSION_HEIGHT, check_upper

VP_TOL = 1e-12
VP_MAX_ITER = 10_000

# smallest damping factor tried before falling back to Newton
VP_MIN_DAMPING = 2.0**-6

# iterations between stall checks of the fixed-point iteration
VP_STALL_WINDOW = 50

# Gauss-Legendre order and table size for the Marchenko-Pastur CDF
_MP_GAUSS_ORDER = 8
_MP_TABLE_SIZE = 2048


class ConvergenceError(RuntimeError):
    """A fixed-point or Newton solve did not converge."""

    last_residual: float
    z: complex

    def __init__(self, msg: str, last_residual: float, z: complex) -> None:
        super().__init__(msg)
        self.last_residual = last_residual
        self.z = z


class SmoothCDF:
    """
    A limiting distribution: density on a support interval, distribution
    function, an optional atom (location, mass), quantiles by bracketing on
    the distribution function, and optionally its Stieltjes transform.
    """

    name: str
    density: Callable[[Any], Any]
    cdf: Callable[[Any], Any]
    support: tuple[float, float]
    atom: Optional[tuple[float, float]]
    stieltjes: Optional[Callable[[complex], complex]]

    def __init__(
        self,
        name: str,
        density: Callable[[Any], Any],
        cdf: Callable[[Any], Any],
        support: tuple[float, float],
        atom: Optional[tuple[float, float]] = None,
        stieltjes: Optional[Callable[[complex], complex]] = None,
    ) -> None:
        if support[0] > support[1]:
            raise ValueError(f"Invalid support interval {support}.")
        if atom is not None and not 0 <= atom[1] <= 1:
            raise ValueError(f"Atom mass must lie in [0, 1], got {atom[1]}.")
        self.name = name
        self.density = density
        self.cdf = cdf
        self.support = (float(support[0]), float(support[1]))
        self.atom = atom
        self.stieltjes = stieltjes

    def __repr__(self) -> str:
        return f"SmoothCDF({self.name}, support={self.support})"

    def __call__(self, t: Any) -> Any:
        return self.cdf(t)

    def left_limit(self, t: Any) -> Any:
        """F(t-): the distribution function without the atom at t."""
        value = self.cdf(t)
        if self.atom is None:
            return value
        loc, mass = self.atom
        return np.where(np.asarray(t) == loc, value - mass, value) * 1.0

    def breakpoints(self) -> np.ndarray:
        """The atom location, if any, and the support ends."""
        pts = [self.support[0], self.support[1]]
        if self.atom is not None:
            pts.append(self.atom[0])
        return np.unique(pts)

    def quantile(self, q: Any) -> Any:
        """inf{t : F(t) >= q}, vectorized over q."""
        levels = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((levels < 0) | (levels > 1)):
            raise ValueError("Quantile levels must lie in [0, 1].")
        out = np.array([self._quantile(level) for level in levels])
        return float(out[0]) if np.ndim(q) == 0 else out.reshape(np.shape(q))

    def _quantile(self, q: float) -> float:
        lo, hi = self.support
        if self.atom is not None:
            loc, mass = self.atom
            top = float(self.cdf(loc))
            if top - mass < q <= top:
                return loc
        if q <= float(self.cdf(lo)):
            return lo
        if q >= float(self.cdf(hi)):
            return hi
        return float(
            brentq(lambda x: float(self.cdf(x)) - q, lo, hi, xtol=1e-13)
        )

    def rows(self, grid: np.ndarray) -> list[tuple[float, float, float]]:
        """CSV rows (x, pdf, cdf) on a grid."""
        grid = np.asarray(grid, dtype=float)
        pdf = np.asarray(self.density(grid), dtype=float)
        cdf = np.asarray(self.cdf(grid), dtype=float)
        return list(zip(grid.tolist(), pdf.tolist(), cdf.tolist()))


### SEMICIRCLE ################################################################


def semicircle_stieltjes(z: Any) -> Any:
    """
    (-z + sqrt(z^2 - 4)) / 2 with the branch in the upper half-plane, taken
    as sqrt(z - 2) sqrt(z + 2) with principal roots.
    """
    z = np.asarray(z, dtype=complex)
    out = (-z + np.sqrt(z - 2) * np.sqrt(z + 2)) / 2
    return complex(out) if out.ndim == 0 else out


def semicircle() -> SmoothCDF:
    """The semicircle law on [-2, 2]."""

    def density(x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= 2
        return np.where(inside, np.sqrt(np.clip(4 - x * x, 0, None)), 0.0) / (
            2 * np.pi
        )

    def cdf(x: Any) -> Any:
        x = np.clip(np.asarray(x, dtype=float), -2, 2)
        out = (
            0.5
            + x * np.sqrt(np.clip(4 - x * x, 0, None)) / (4 * np.pi)
            + np.arcsin(x / 2) / np.pi
        )
        out = np.clip(out, 0, 1)
        return float(out) if out.ndim == 0 else out

    return SmoothCDF(
        "semicircle", density, cdf, (-2.0, 2.0), stieltjes=semicircle_stieltjes
    )


### MARCHENKO-PASTUR ##########################################################


def marchenko_pastur_edges(y: float) -> tuple[float, float]:
    """The edges b = (1 - sqrt y)^2 and c = (1 + sqrt y)^2."""
    _check_ratio(y)
    return (1 - math.sqrt(y)) ** 2, (1 + math.sqrt(y)) ** 2


def marchenko_pastur_stieltjes(y: float, z: Any) -> Any:
    """
    (1 - y - z + sqrt((z - b)(z - c))) / (2yz), with the root taken as
    sqrt(z - b) sqrt(z - c) so that the result lies in the upper half-plane.
    Includes the atom at the origin when y > 1.
    """
    b, c = marchenko_pastur_edges(y)
    z = np.asarray(z, dtype=complex)
    out = (1 - y - z + np.sqrt(z - b) * np.sqrt(z - c)) / (2 * y * z)
    return complex(out) if out.ndim == 0 else out


def marchenko_pastur(y: float) -> SmoothCDF:
    """
    The Marchenko-Pastur law with ratio y > 0. The continuous part has mass
    min(1, 1/y); the rest sits at the origin.

    The distribution function integrates the density in the angle phi with
    x = m - r cos(phi), m = (b + c)/2, r = (c - b)/2, which removes the
    square-root singularities at both edges (and the 1/sqrt(x) blow-up at
    the hard edge when y = 1).
    """
    _check_ratio(y)
    b, c = marchenko_pastur_edges(y)
    m, r = (b + c) / 2, (c - b) / 2
    atom_mass = 1 - 1 / y if y > 1 else 0.0

    def integrand(phi: np.ndarray) -> np.ndarray:
        x = m - r * np.cos(phi)
        safe = np.where(x > 0, x, 1.0)
        value = (r * np.sin(phi)) ** 2 / (2 * np.pi * safe * y)
        return np.where(x > 0, value, 0.0)

    nodes, weights = np.polynomial.legendre.leggauss(_MP_GAUSS_ORDER)

    def integrate(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # Gauss-Legendre on each [lo, hi], vectorized over the intervals
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        half = (hi - lo)[..., None] / 2
        mid = (hi + lo)[..., None] / 2
        return np.sum(weights * integrand(mid + half * nodes) * half, axis=-1)

    knots = np.linspace(0, np.pi, _MP_TABLE_SIZE + 1)
    table = np.concatenate([[0.0], np.cumsum(integrate(knots[:-1], knots[1:]))])

    def angle(x: np.ndarray) -> np.ndarray:
        return np.arccos(np.clip((m - x) / r, -1, 1))

    def continuous_cdf(x: Any) -> np.ndarray:
        phi = angle(np.asarray(x, dtype=float))
        k = np.minimum(
            (phi / np.pi * _MP_TABLE_SIZE).astype(int), _MP_TABLE_SIZE
        )
        return table[k] + integrate(knots[k], phi)

    def density(x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        inside = (x >= b) & (x <= c) & (x > 0)
        safe = np.where(inside, x, 1.0)
        root = np.sqrt(np.clip((c - safe) * (safe - b), 0, None))
        return np.where(inside, root / (2 * np.pi * safe * y), 0.0)

    def cdf(x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        out = continuous_cdf(x) + np.where(x >= 0, atom_mass, 0.0)
        out = np.where(x < min(b, 0.0), 0.0, np.clip(out, 0, 1))
        return float(out) if out.ndim == 0 else out

    return SmoothCDF(
        f"marchenko-pastur({y:g})",
        density,
        cdf,
        (min(b, 0.0) if atom_mass > 0 else b, c),
        atom=(0.0, atom_mass) if atom_mass > 0 else None,
        stieltjes=lambda z: marchenko_pastur_stieltjes(y, z),
    )


def _check_ratio(y: float) -> None:
    if not y > 0:
        raise ValueError(f"Marchenko-Pastur ratio must be positive, got {y}.")


### VARIANCE PROFILE ##########################################################


class DiscreteMeasure:
    """A probability measure with finitely many non-negative atoms."""

    atoms: np.ndarray
    weights: np.ndarray

    def __init__(
        self, atoms: Sequence[float], weights: Optional[Sequence[float]] = None
    ) -> None:
        atoms_arr = np.asarray(atoms, dtype=float).ravel()
        if len(atoms_arr) == 0:
            raise ValueError("A measure needs at least one atom.")
        if weights is None:
            weights_arr = np.full(len(atoms_arr), 1 / len(atoms_arr))
        else:
            weights_arr = np.asarray(weights, dtype=float).ravel()
        if weights_arr.shape != atoms_arr.shape:
            raise ValueError("Atoms and weights must have the same length.")
        if not np.all(np.isfinite(atoms_arr)):
            raise ValueError("Atoms must be finite.")
        if np.any(atoms_arr < 0):
            raise ValueError("Atoms must be non-negative.")
        if np.any(weights_arr < 0):
            raise ValueError("Weights must be non-negative.")
        if abs(weights_arr.sum() - 1) > 1e-12:
            raise ValueError(f"Weights sum to {weights_arr.sum()}, not 1.")
        self.atoms = atoms_arr
        self.weights = weights_arr

    def __repr__(self) -> str:
        return (
            f"DiscreteMeasure(atoms={len(self.atoms)}, "
            + f"mean={self.mean():.4g})"
        )

    def mean(self) -> float:
        """The first moment."""
        return float(np.dot(self.atoms, self.weights))

    def cdf(self, t: Any) -> Any:
        """nu((-inf, t]), vectorized over t."""
        t = np.asarray(t, dtype=float)
        out = np.sum(self.weights * (self.atoms <= t[..., None]), axis=-1)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict[str, list[float]]:
        """Serializable record."""
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}


def point_mass(x: float) -> DiscreteMeasure:
    """The unit mass at x."""
    return DiscreteMeasure([x], [1.0])


def empirical_measure(a_sq: Sequence[float]) -> DiscreteMeasure:
    """nu_n = (1/n) sum_j delta_{a_j^2}, with repeated values merged."""
    a = np.asarray(a_sq, dtype=float).ravel()
    if len(a) == 0:
        raise ValueError("Need at least one term a_j^2.")
    atoms, counts = np.unique(a, return_counts=True)
    return DiscreteMeasure(atoms, counts / len(a))


def vp_residual(nu: DiscreteMeasure, z: complex, g: complex) -> float:
    """|g - int lambda dnu / (-z - lambda g)|."""
    return abs(g - _vp_map(nu, z, g))


def vp_fixed_point(
    nu: DiscreteMeasure,
    z: complex,
    tol: float = VP_TOL,
    max_iter: int = VP_MAX_ITER,
    g0: Optional[complex] = None,
    logger: Optional[Logger] = None,
) -> tuple[complex, complex]:
    """
    Solves g = int lambda dnu(lambda) / (-z - lambda g) in the Herglotz class
    Im g > 0 and returns (g, S) with S = int dnu(lambda) / (-z - lambda g).

    The iteration starts from g0 (default -mean(nu)/z), halves the damping
    factor each time the residual grows, and switches to a Newton solve when
    the residual stalls. When nu has no mass away from zero, g = 0.
    """
    z = check_upper(z)
    if not tol > 0:
        raise ValueError("Tolerance must be positive.")
    logger = get_logger(logger)
    mean = nu.mean()
    if mean == 0:
        return 0j, complex(-1 / z)
    g = complex(g0) if g0 is not None else -mean / z
    theta = 1.0
    residual = math.inf
    checkpoint = math.inf
    for it in range(max_iter):
        mapped = _vp_map(nu, z, g)
        previous, residual = residual, abs(g - mapped)
        if residual < tol and g.imag > 0:
            break
        if residual > previous and theta > VP_MIN_DAMPING:
            theta /= 2
            logger.debug(f"vp iteration {it}: damping {theta} at z = {z}")
        if (it + 1) % VP_STALL_WINDOW == 0:
            if residual > 0.5 * checkpoint:
                try:
                    g, _ = vp_newton(nu, z, g0=g, tol=tol)
                    residual = vp_residual(nu, z, g)
                    break
                except ConvergenceError:
                    logger.debug(f"vp newton fallback failed at z = {z}")
            checkpoint = residual
        g = (1 - theta) * g + theta * mapped
    else:
        residual = vp_residual(nu, z, g)
    if residual >= tol:
        msg = (
            f"vp fixed point did not converge at z = {z}: "
            + f"residual {residual:.3e}"
        )
        logger.error(msg)
        raise ConvergenceError(msg, residual, z)
    if not g.imag * z.imag > 0:
        msg = f"vp fixed point left the Herglotz class at z = {z}: g = {g}"
        logger.error(msg)
        raise ConvergenceError(msg, residual, z)
    S = _vp_stieltjes(nu, z, g)
    if not S.imag > 0:
        msg = f"vp Stieltjes transform not Herglotz at z = {z}: S = {S}"
        logger.error(msg)
        raise ConvergenceError(msg, residual, z)
    return g, S


def vp_newton(
    nu: DiscreteMeasure,
    z: complex,
    g0: Optional[complex] = None,
    tol: float = VP_TOL,
) -> tuple[complex, complex]:
    """
    Solves the same scalar equation as vp_fixed_point as a real 2D system in
    (Re g, Im g) with scipy's hybrid Newton method. Rejects roots outside
    the Herglotz class.
    """
    z = check_upper(z)
    if nu.mean() == 0:
        return 0j, complex(-1 / z)
    start = complex(g0) if g0 is not None else -nu.mean() / z

    def equations(u: np.ndarray) -> list[float]:
        g = complex(u[0], u[1])
        diff = g - _vp_map(nu, z, g)
        return [diff.real, diff.imag]

    solution, _, ier, mesg = fsolve(
        equations, [start.real, start.imag], xtol=1e-15, full_output=True
    )
    g = complex(solution[0], solution[1])
    residual = vp_residual(nu, z, g)
    if ier != 1 and residual >= tol:
        raise ConvergenceError(
            f"vp newton failed at z = {z}: {mesg}", residual, z
        )
    if residual >= tol:
        raise ConvergenceError(
            f"vp newton residual {residual:.3e} above tolerance at z = {z}",
            residual,
            z,
        )
    if not g.imag > 0:
        raise ConvergenceError(
            f"vp newton root g = {g} is not in the Herglotz class", residual, z
        )
    return g, _vp_stieltjes(nu, z, g)


def vp_cdf(
    nu: DiscreteMeasure,
    grid: np.ndarray,
    v: float = DEFAULT_INVERSION_HEIGHT,
    tol: float = VP_TOL,
    max_iter: int = VP_MAX_ITER,
    logger: Optional[Logger] = None,
) -> SmoothCDF:
    """
    The variance-profile limit recovered on a grid: density Im S(x + iv)/pi
    from the fixed point at each grid point (warm-started from its left
    neighbour), distribution function by cumulative trapezoid quadrature,
    clamped monotone.
    """
    if not v > 0:
        raise ValueError(f"Inversion height must be positive, got {v}.")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("The grid must be strictly increasing.")
    logger = get_logger(logger)
    pdf = np.empty(len(grid))
    g_prev: Optional[complex] = None
    for k, x in enumerate(grid):
        z = complex(x, v)
        try:
            g_prev, S = vp_fixed_point(
                nu, z, tol, max_iter, g0=g_prev, logger=logger
            )
        except ConvergenceError as e:
            msg = f"vp_cdf failed at x = {x}: {e}"
            logger.error(msg)
            raise ConvergenceError(msg, e.last_residual, z) from e
        pdf[k] = S.imag / np.pi
    cum = np.concatenate([[0.0], cumulative_trapezoid(pdf, grid)])
    cum = np.clip(np.maximum.accumulate(cum), 0, 1)

    def density(x: Any) -> Any:
        return np.interp(x, grid, pdf, left=0.0, right=0.0)

    def cdf(x: Any) -> Any:
        out = np.interp(x, grid, cum, left=0.0, right=cum[-1])
        return float(out) if np.ndim(out) == 0 else out

    def stieltjes(z: complex) -> complex:
        return vp_fixed_point(nu, z, tol, max_iter)[1]

    return SmoothCDF(
        "variance-profile",
        density,
        cdf,
        (float(grid[0]), float(grid[-1])),
        stieltjes=stieltjes,
    )


def _vp_map(nu: DiscreteMeasure, z: complex, g: complex) -> complex:
    return complex(np.sum(nu.weights * nu.atoms / (-z - nu.atoms * g)))


def _vp_stieltjes(nu: DiscreteMeasure, z: complex, g: complex) -> complex:
    return complex(np.sum(nu.weights / (-z - nu.atoms * g)))
