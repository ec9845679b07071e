"""
Module for the resolvent calculus of s(x) = (1/n) Tr (A_n(x) - zI)^{-1},
where A_n(x) is the normalized symmetric matrix built from a lex-ordered
vector x of length k_n.

With R the resolvent and E_u = dA_n/dx_u = (e_i e_j^T + e_j e_i^T)/sqrt(n)
(or e_i e_i^T / sqrt(n) on the diagonal), the coordinate derivatives are

    d s / dx_u     = -(1/n) Tr(R E_u R)   = -n^{-3/2} (2 - I(i=j)) (R^2)_ij
    d^2 s / dx_u^2 =  (2/n) Tr(R E_u R E_u R)
    d^3 s / dx_u^3 = -(6/n) Tr(R E_u R E_u R E_u R).

Also the perturbation inequality
|s(x) - s(y)| <= v^{-2} ((1/n^2)(sum_i (x_ii - y_ii)^2
+ 2 sum_{i>j} (x_ij - y_ij)^2))^{1/2}, with v = Im z.
"""

from __future__ import annotations

import math
from functools import lru_cache
from logging import Logger
from typing import Optional, Sequence, Union

import numpy as np

from ..field.field import FieldSample
from ..field.lattice import num_positions
from ..field.rng import RngStream
from ..log_config import get_logger
from ..matrix_build import SymMatrix
from ..spectra import check_upper, eigenvalues, stieltjes_from_eigs

# relative slack of the perturbation inequality
PERTURBATION_SLACK = 1e-9

# finite-difference step for first partials
FD_STEP = 1e-6

# sampled points and inflation factor for fitted derivative constants
FIT_SAMPLES = 1000
FIT_INFLATION = 2.0

Entries = Union[FieldSample, np.ndarray, Sequence[float]]


class BoundViolation(RuntimeError):
    """A checked inequality failed."""


def order_from_length(k_n: int) -> int:
    """The order n with n(n+1)/2 = k_n."""
    n = (math.isqrt(8 * k_n + 1) - 1) // 2
    if num_positions(n) != k_n or n < 1:
        raise ValueError(f"{k_n} is not a triangular number n(n+1)/2.")
    return n


def as_vector(x: Entries) -> np.ndarray:
    """The lex-ordered entry vector of a triangular field or array."""
    if isinstance(x, FieldSample):
        return x.to_triangular_vector()
    return np.asarray(x, dtype=float).ravel()


def resolvent(M: Union[SymMatrix, np.ndarray], z: complex) -> np.ndarray:
    """(M - zI)^{-1} as a dense complex matrix."""
    data = np.asarray(getattr(M, "data", M), dtype=float)
    n = data.shape[0]
    return np.linalg.solve(data - z * np.eye(n), np.eye(n, dtype=complex))


def stieltjes_of_vector(x: Entries, z: complex) -> complex:
    """s(x) = (1/n) Tr (A_n(x) - zI)^{-1}, via the eigenvalues."""
    x = as_vector(x)
    M = SymMatrix.from_triangular_vector(x, order_from_length(len(x)))
    return stieltjes_from_eigs(eigenvalues(M), z)


def resolvent_partials(
    M: Union[SymMatrix, np.ndarray], z: complex
) -> np.ndarray:
    """
    All first partials ds/dx_ij, 1 <= j <= i <= n, in lex order, for an
    already normalized matrix M.
    """
    z = check_upper(z)
    R = resolvent(M, z)
    n = R.shape[0]
    R2 = R @ R
    rows, cols = np.tril_indices(n)
    factor = np.where(rows == cols, 1.0, 2.0)
    return -(n**-1.5) * factor * R2[rows, cols]


def partials_of_vector(x: Entries, z: complex) -> np.ndarray:
    """First partials of s at the point x."""
    x = as_vector(x)
    n = order_from_length(len(x))
    return resolvent_partials(SymMatrix.from_triangular_vector(x, n), z)


def finite_difference_partials(
    x: Entries, z: complex, step: float = FD_STEP
) -> np.ndarray:
    """Central finite differences of s along every coordinate."""
    x = as_vector(x)
    out = np.empty(len(x), dtype=complex)
    for u in range(len(x)):
        h = step * max(1.0, abs(x[u]))
        up, down = x.copy(), x.copy()
        up[u] += h
        down[u] -= h
        out[u] = (stieltjes_of_vector(up, z) - stieltjes_of_vector(down, z)) / (
            2 * h
        )
    return out


def coordinate_derivative(
    x: Entries, z: complex, u: int, order: int
) -> complex:
    """
    The analytic derivative of s of the given order (1, 2 or 3) along the
    0-based lex coordinate u at the point x.
    """
    if order not in (1, 2, 3):
        raise ValueError("Derivative order must be 1, 2 or 3.")
    z = check_upper(z)
    x = as_vector(x)
    n = order_from_length(len(x))
    R = resolvent(SymMatrix.from_triangular_vector(x, n), z)
    rows, cols = np.tril_indices(n)
    i, j = int(rows[u]), int(cols[u])
    E = np.zeros((n, n))
    E[i, j] = E[j, i] = 1 / math.sqrt(n)
    RE = R @ E
    # Tr(R (E R)^order) = Tr((R E)^order R)
    product = np.linalg.matrix_power(RE, order) @ R
    sign_scale = {1: -1.0, 2: 2.0, 3: -6.0}[order]
    return complex(sign_scale * np.trace(product) / n)


def fit_derivative_constant(
    n: int,
    z: complex,
    order: int,
    samples: int = FIT_SAMPLES,
    seed: int = 0,
) -> float:
    """
    Empirical uniform bound on |d^order s / dx_u^order|: the maximum over
    sampled standard Gaussian points and uniformly drawn coordinates, inflated
    by FIT_INFLATION. Cached per arguments.
    """
    return _fit_derivative_constant(n, complex(z), order, samples, seed)


@lru_cache(maxsize=128)
def _fit_derivative_constant(
    n: int, z: complex, order: int, samples: int, seed: int
) -> float:
    rng = RngStream(seed, stream_id=order)
    k_n = num_positions(n)
    coords = rng.generator.integers(0, k_n, size=samples)
    largest = 0.0
    for k in range(samples):
        x = rng.standard_normal(k_n)
        value = coordinate_derivative(x, z, int(coords[k]), order)
        largest = max(largest, abs(value))
    return FIT_INFLATION * largest


def derivative_constants(n: int, z: complex) -> dict[str, float]:
    """
    Analytic uniform constants of the derivative bounds,
    |d^k s| <= c_k / n^{(k+2)/2} with c1 = 2/v^2, c2 = 4/v^3 and c3 = 12/v^4,
    together with the implied bounds at order n.
    """
    v = check_upper(z).imag
    c1, c2, c3 = 2 / v**2, 4 / v**3, 12 / v**4
    return {
        "c1": c1,
        "c2": c2,
        "c3": c3,
        "bound1": c1 / n**1.5,
        "bound2": c2 / n**2,
        "bound3": c3 / n**2.5,
    }


def rate_exponent(sizes: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(size)."""
    sizes_arr = np.asarray(sizes, dtype=float)
    values_arr = np.asarray(values, dtype=float)
    if len(sizes_arr) < 2 or sizes_arr.shape != values_arr.shape:
        raise ValueError("Need at least two matching (size, value) pairs.")
    if np.any(sizes_arr <= 0) or np.any(values_arr <= 0):
        raise ValueError("Sizes and values must be positive.")
    slope, _ = np.polyfit(np.log(sizes_arr), np.log(values_arr), 1)
    return float(slope)


def perturbation_rhs(x: Entries, y: Entries, z: complex) -> float:
    """
    v^{-2} ((1/n^2)(sum of squared diagonal differences + twice the sum of
    squared off-diagonal differences))^{1/2}.
    """
    v = check_upper(z).imag
    diff = as_vector(x) - as_vector(y)
    n = order_from_length(len(diff))
    rows, cols = np.tril_indices(n)
    diag = rows == cols
    total = np.sum(diff[diag] ** 2) + 2 * np.sum(diff[~diag] ** 2)
    return float(math.sqrt(total / n**2) / v**2)


def perturbation_bound_check(
    x: Entries,
    y: Entries,
    z: complex,
    logger: Optional[Logger] = None,
) -> tuple[float, float]:
    """
    Returns (|s(x) - s(y)|, rhs) and raises BoundViolation unless
    lhs <= rhs (1 + 1e-9).
    """
    z = check_upper(z)
    xv, yv = as_vector(x), as_vector(y)
    if xv.shape != yv.shape:
        msg = (
            "perturbation check needs equal orders, "
            + f"got {xv.shape}, {yv.shape}"
        )
        get_logger(logger).error(msg)
        raise ValueError(msg)
    lhs = abs(stieltjes_of_vector(xv, z) - stieltjes_of_vector(yv, z))
    rhs = perturbation_rhs(xv, yv, z)
    if lhs > rhs * (1 + PERTURBATION_SLACK):
        msg = f"perturbation bound violated at z = {z}: {lhs:.6e} > {rhs:.6e}"
        get_logger(logger).error(msg)
        raise BoundViolation(msg)
    return lhs, rhs
