"""
Module for the Lindeberg swap diagnostics.

The swap decomposition replaces the entries Z_k of one lex-ordered vector by
the entries X_k of another, one coordinate at a time, and splits the total
change f(X) - f(Z) of f = s into

    R1 = sum_k (X_k - Z_k) d_k f(X_1, ..., X_{k-1}, 0, Z_{k+1}, ...)
    R2 = 1/2 sum_k (X_k^2 - Z_k^2) d_k^2 f(U_{k-1}, 0, Z_{k+1}, ...)
    R3 = f(X) - f(Z) - R1 - R2,

where U_{k-1} is (X_1, ..., X_{k-1}) with the coordinates of the ring set of
position k set to zero. The Gaussian interpolation check compares the mean
of s under two independent Gaussian vectors against the gap between their
variance profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import Logger
from typing import Any, NamedTuple, Optional, Union

import numpy as np

from ..field.lattice import num_positions, ring_position_sets
from ..field.rng import RngStream
from ..log_config import get_logger
from ..matrix_build import SymMatrix
from ..spectra import check_upper
from .resolvent import (
    BoundViolation,
    Entries,
    as_vector,
    fit_derivative_constant,
    order_from_length,
    resolvent_partials,
    stieltjes_of_vector,
)

SWAP_MAX_ORDER = 32

# relative step for second partials by differences of analytic first partials
SECOND_PARTIAL_STEP = 1e-5

INTERPOLATION_MIN_REPLICATES = 10_000
INTERPOLATION_BATCH = 1000


@dataclass
class SwapReport:
    """The three swap terms and the checks attached to them."""

    R1: complex
    R2: complex
    R3: complex
    a: int
    z: complex
    difference: complex
    residual: float
    L3: float
    bound_rhs: float

    @property
    def within_bound(self) -> bool:
        """True when |R3| does not exceed the bound right-hand side."""
        return abs(self.R3) <= self.bound_rhs

    def to_dict(self) -> dict[str, Any]:
        """Serializable record; complex values become [re, im] pairs."""
        return {
            "R1": _pair(self.R1),
            "R2": _pair(self.R2),
            "R3": _pair(self.R3),
            "abs_R3": abs(self.R3),
            "a": self.a,
            "z": _pair(self.z),
            "difference": _pair(self.difference),
            "residual": self.residual,
            "L3": self.L3,
            "bound_rhs": self.bound_rhs,
            "within_bound": self.within_bound,
        }


def swap_decomposition(
    X: Entries,
    Z: Entries,
    z: complex,
    a: int,
    allow_large: bool = False,
    L3: Optional[float] = None,
    logger: Optional[Logger] = None,
) -> SwapReport:
    """
    Computes R1 and R2 from analytic first partials and from central
    differences of analytic first partials (step 1e-5 max(1, |x|)), and R3 as
    the exact residual. The R3 bound is
    L3 (sum_k (X_k^2 + Z_k^2) sum_{u in ring(k)} |X_u| + sum_k |X_k|^3
    + sum_k |Z_k|^3), with L3 fitted by fit_derivative_constant unless given.
    """
    logger = get_logger(logger)
    z = check_upper(z)
    x, zv = as_vector(X), as_vector(Z)
    if x.shape != zv.shape:
        msg = f"swap needs vectors of equal length, got {x.shape}, {zv.shape}"
        logger.error(msg)
        raise ValueError(msg)
    n = order_from_length(len(x))
    if n > SWAP_MAX_ORDER and not allow_large:
        msg = (
            f"swap decomposition at n = {n} exceeds the cost guard "
            + f"n <= {SWAP_MAX_ORDER}; pass allow_large=True to override"
        )
        logger.error(msg)
        raise ValueError(msg)
    if a < 1:
        raise ValueError("Ring radius must be at least 1.")
    rings = [np.asarray(r, dtype=int) for r in ring_position_sets(n, a)]
    k_n = num_positions(n)
    first_terms = []
    second_terms = []
    ring_mass = np.empty(k_n)
    for k in range(k_n):
        point = np.concatenate([x[:k], [0.0], zv[k + 1 :]])
        d1 = _partial(point, n, z, k)
        first_terms.append((x[k] - zv[k]) * d1)
        ringed = point.copy()
        ringed[rings[k]] = 0.0
        d2 = _second_partial(ringed, n, z, k)
        second_terms.append(0.5 * (x[k] ** 2 - zv[k] ** 2) * d2)
        ring_mass[k] = np.sum(np.abs(x[rings[k]]))
    R1 = _fsum_complex(first_terms)
    R2 = _fsum_complex(second_terms)
    difference = stieltjes_of_vector(x, z) - stieltjes_of_vector(zv, z)
    R3 = difference - R1 - R2
    residual = abs(difference - (R1 + R2 + R3))
    if L3 is None:
        L3 = fit_derivative_constant(n, z, order=3)
    bound = L3 * (
        math.fsum((x**2 + zv**2) * ring_mass)
        + math.fsum(np.abs(x) ** 3)
        + math.fsum(np.abs(zv) ** 3)
    )
    logger.info(
        f"swap n={n} a={a} z={z}: |R1|={abs(R1):.3e} |R2|={abs(R2):.3e} "
        + f"|R3|={abs(R3):.3e} bound={bound:.3e}"
    )
    return SwapReport(
        R1=R1,
        R2=R2,
        R3=R3,
        a=a,
        z=z,
        difference=difference,
        residual=residual,
        L3=float(L3),
        bound_rhs=float(bound),
    )


def _partial(point: np.ndarray, n: int, z: complex, u: int) -> complex:
    M = SymMatrix.from_triangular_vector(point, n)
    return complex(resolvent_partials(M, z)[u])


def _second_partial(point: np.ndarray, n: int, z: complex, u: int) -> complex:
    h = SECOND_PARTIAL_STEP * max(1.0, abs(point[u]))
    up, down = point.copy(), point.copy()
    up[u] += h
    down[u] -= h
    return (_partial(up, n, z, u) - _partial(down, n, z, u)) / (2 * h)


def _fsum_complex(terms: list[complex]) -> complex:
    return complex(
        math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms)
    )


def _pair(w: complex) -> list[float]:
    return [float(w.real), float(w.imag)]


### GAUSSIAN INTERPOLATION ####################################################


class InterpolationCheck(NamedTuple):
    """Monte Carlo left side with its standard error, and the bound."""

    lhs: float
    rhs: float
    stderr: float
    L2: float

    @property
    def holds(self) -> bool:
        """lhs <= rhs + 3 stderr."""
        return self.lhs <= self.rhs + 3 * self.stderr


def gaussian_interpolation_check(
    profile_y: Union[np.ndarray, float],
    profile_z: Union[np.ndarray, float],
    z: complex,
    replicates: int = INTERPOLATION_MIN_REPLICATES,
    rng: Optional[RngStream] = None,
    n: Optional[int] = None,
    L2: Optional[float] = None,
    check: bool = True,
    logger: Optional[Logger] = None,
) -> InterpolationCheck:
    """
    Checks |E s(Y) - E s(Z)| <= (L2/2) sum_i |E Y_i^2 - E Z_i^2| for
    independent centered Gaussian vectors Y and Z with the given variance
    profiles (lex-ordered vectors of length k_n, n x n arrays whose lower
    triangles are used, or scalars together with n). L2 is the fitted
    uniform bound on second partials unless given. Raises BoundViolation
    when check is set and lhs > rhs + 3 stderr.
    """
    logger = get_logger(logger)
    z = check_upper(z)
    if replicates < INTERPOLATION_MIN_REPLICATES:
        raise ValueError(
            f"Need at least {INTERPOLATION_MIN_REPLICATES} replicates."
        )
    var_y = _profile_vector(profile_y, n)
    var_z = _profile_vector(profile_z, n)
    if var_y.shape != var_z.shape:
        raise ValueError("Variance profiles must have the same order.")
    if np.any(var_y < 0) or np.any(var_z < 0):
        raise ValueError("Variances must be non-negative.")
    order = order_from_length(len(var_y))
    rng = rng if rng is not None else RngStream(0)
    rng_y = rng.spawn(rng.stream_id * 2 + 1)
    rng_z = rng.spawn(rng.stream_id * 2 + 2)
    s_y = _mc_stieltjes(var_y, order, z, replicates, rng_y)
    s_z = _mc_stieltjes(var_z, order, z, replicates, rng_z)
    lhs = abs(np.mean(s_y) - np.mean(s_z))
    stderr = math.sqrt(
        (np.var(s_y.real) + np.var(s_y.imag)) / replicates
        + (np.var(s_z.real) + np.var(s_z.imag)) / replicates
    )
    if L2 is None:
        L2 = fit_derivative_constant(order, z, order=2)
    rhs = L2 / 2 * math.fsum(np.abs(var_y - var_z))
    result = InterpolationCheck(
        float(lhs), float(rhs), float(stderr), float(L2)
    )
    logger.info(f"interpolation n={order} z={z}: {result}")
    if check and not result.holds:
        msg = (
            f"interpolation bound violated at z = {z}: "
            + f"{result.lhs:.3e} > {result.rhs:.3e} + 3 * {result.stderr:.3e}"
        )
        logger.error(msg)
        raise BoundViolation(msg)
    return result


def _profile_vector(
    profile: Union[np.ndarray, float], n: Optional[int]
) -> np.ndarray:
    if np.ndim(profile) == 0:
        if n is None:
            raise ValueError("Scalar variance profiles need the order n.")
        return np.full(num_positions(n), float(profile))
    arr = np.asarray(profile, dtype=float)
    if arr.ndim == 2:
        rows, cols = np.tril_indices(arr.shape[0])
        return arr[rows, cols]
    return arr.ravel()


def _mc_stieltjes(
    variances: np.ndarray, n: int, z: complex, replicates: int, rng: RngStream
) -> np.ndarray:
    """s at independent Gaussian draws, with batched eigenvalue solves."""
    rows, cols = np.tril_indices(n)
    scale = np.sqrt(variances) / math.sqrt(n)
    out = np.empty(replicates, dtype=complex)
    for start in range(0, replicates, INTERPOLATION_BATCH):
        size = min(INTERPOLATION_BATCH, replicates - start)
        draws = rng.standard_normal((size, len(variances))) * scale
        lower = np.zeros((size, n, n))
        lower[:, rows, cols] = draws
        full = lower + np.transpose(np.tril(lower, -1), (0, 2, 1))
        eigs = np.linalg.eigvalsh(full)
        out[start : start + size] = np.mean(1 / (eigs - z), axis=1)
    return out
