r"""
Module for generating entry fields with independent or martingale difference
entries.

Five generators are provided:
- `gen_gaussian_field`: independent centered Gaussian entries with a given
  variance profile (the Gaussian comparison ensemble).
- `gen_arch_field`: a nonlinear ARCH($\infty$) random field
  $X_{ij} = \xi_{ij}(c + \sum_{(k,l) >_{lex} (0,0)} g_{kl}(X_{i-k,j-l}))$
  with $g_{kl}(x) = \alpha_{kl}\tanh(x)$, simulated by one causal sweep in
  lexicographic order over an enlarged lattice.
- `gen_martingale_matrix_fill`: a scalar ARCH(1) martingale difference
  sequence placed along the lower triangle in lexicographic order.
- `gen_panel`: p independent ARCH(1) rows forming a p x n panel.
- `gen_gaussian_panel`: the i.i.d. Gaussian p x n panel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from logging import Logger
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..log_config import get_logger
from .field import FieldSample
from .lattice import num_positions
from .rng import CALIBRATION_STREAM_OFFSET, RngStream

VarianceProfile = Union[np.ndarray, Callable[[int, int], float]]

# unit-variance check tolerance and the sample size above which it applies
UNIT_VARIANCE_BAND = (0.9, 1.1)
UNIT_VARIANCE_MIN_SAMPLES = 100_000

# calibration sites estimating the ARCH field standard deviation
ARCH_CALIBRATION_SAMPLES = 1_000_000

ARCH1_BURN_IN = 1000


### GAUSSIAN ##################################################################


def gen_gaussian_field(
    n: int,
    variance_profile: Optional[VarianceProfile] = None,
    rng: Optional[RngStream] = None,
) -> FieldSample:
    """
    Independent centered Gaussian entries X_ij, 1 <= j <= i <= n, with
    variances sigma_ij^2 taken from variance_profile (an n x n array whose
    lower triangle is used, or a callable of the 1-based pair (i, j)). The
    default profile is identically one.
    """
    _check_order(n)
    rng = rng if rng is not None else RngStream(0)
    profile = _profile_array(n, variance_profile)
    xi = rng.standard_normal((n, n))
    entries = np.tril(np.sqrt(profile) * xi)
    return FieldSample(
        entries,
        sigma_hat=1.0,
        declared_profile=np.tril(profile),
        provenance={
            "generator": "gaussian",
            "params": {
                "profile": "unit" if variance_profile is None else "custom"
            },
            "seed": rng.seed,
            "stream_id": rng.stream_id,
        },
    )


def gen_gaussian_panel(
    p: int, n: int, rng: Optional[RngStream] = None
) -> FieldSample:
    """An i.i.d. standard Gaussian p x n panel."""
    _check_order(p)
    _check_order(n)
    rng = rng if rng is not None else RngStream(0)
    entries = rng.standard_normal((p, n))
    return FieldSample(
        entries,
        rectangular=True,
        sigma_hat=1.0,
        declared_profile=np.ones((p, n)),
        provenance={
            "generator": "gaussian",
            "params": {"p": p},
            "seed": rng.seed,
            "stream_id": rng.stream_id,
        },
    )


def sample_profile_from_sequence(n: int, a_sq: Sequence[float]) -> np.ndarray:
    """
    Returns the n x n variance profile sigma_ij^2 = a_i^2 a_j^2 built from the
    first n terms of a bounded non-negative sequence a_j^2.
    """
    _check_order(n)
    a = np.asarray(a_sq, dtype=float)
    if a.ndim != 1 or len(a) < n:
        raise ValueError(f"Need at least {n} terms of a_j^2, got {a.shape}.")
    a = a[:n]
    if not np.all(np.isfinite(a)):
        raise ValueError("The sequence a_j^2 must be bounded.")
    if np.any(a < 0):
        raise ValueError("The sequence a_j^2 must be non-negative.")
    return np.outer(a, a)


def _profile_array(
    n: int, variance_profile: Optional[VarianceProfile]
) -> np.ndarray:
    if variance_profile is None:
        return np.ones((n, n))
    if callable(variance_profile):
        profile = np.zeros((n, n))
        for i in range(1, n + 1):
            for j in range(1, i + 1):
                profile[i - 1, j - 1] = variance_profile(i, j)
    else:
        profile = np.asarray(variance_profile, dtype=float)
        if profile.shape != (n, n):
            raise ValueError(
                f"Variance profile must be {n} x {n}, got {profile.shape}."
            )
    lower = np.tril(profile)
    if np.any(lower < 0):
        raise ValueError("Variances must be non-negative.")
    if not np.all(np.isfinite(lower)):
        raise ValueError("Variances must be finite.")
    return lower


### ARCH(INFINITY) FIELD ######################################################


@dataclass(frozen=True)
class ArchSpec:
    """
    Parameters of the nonlinear ARCH field.

    Attributes:
        c: base volatility, positive.
        rho: geometric decay of the coefficients, in (0, 1).
        alpha_tot: total coefficient mass of the untruncated sum, in [0, 1).
        window: truncation radius W of the coefficient sum, at least 1.
        burn_in: margin B added on every side of the returned window.
        shape: the bounded 1-Lipschitz nonlinearity; only "tanh".
    """

    c: float = 1.0
    rho: float = 0.5
    alpha_tot: float = 0.5
    window: int = 8
    burn_in: int = 32
    shape: str = "tanh"

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("ARCH base volatility c must be positive.")
        if not 0 < self.rho < 1:
            raise ValueError("ARCH decay rho must lie in (0, 1).")
        if not 0 <= self.alpha_tot < 1:
            raise ValueError(
                "ARCH coefficient mass alpha_tot must lie in [0, 1) "
                + "(contraction condition)."
            )
        if self.window < 1:
            raise ValueError("ARCH window W must be at least 1.")
        if self.burn_in < 0:
            raise ValueError("ARCH burn-in margin must be non-negative.")
        if self.shape != "tanh":
            raise ValueError(f'Unknown ARCH shape function "{self.shape}".')

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Returns the window offsets (k, l) >_lex (0, 0) with 0 <= k <= W and
        |l| <= W, and their coefficients
        alpha_kl = alpha_tot (1 - rho)^2 / 2 * rho^(k + |l| - 1),
        normalized so that the untruncated sum equals alpha_tot.
        """
        w = self.window
        offsets = [(0, ell) for ell in range(1, w + 1)]
        offsets += [
            (k, ell) for k in range(1, w + 1) for ell in range(-w, w + 1)
        ]
        arr = np.array(offsets, dtype=int)
        powers = arr[:, 0] + np.abs(arr[:, 1]) - 1
        scale = self.alpha_tot * (1 - self.rho) ** 2 / 2
        return arr, scale * self.rho ** powers.astype(float)

    def to_dict(self) -> dict:
        """Parameter record for serialization."""
        return asdict(self)


def gen_arch_field(
    n: int,
    spec: ArchSpec,
    rng: Optional[RngStream] = None,
    normalize: bool = True,
    calibration_samples: int = ARCH_CALIBRATION_SAMPLES,
    logger: Optional[Logger] = None,
) -> FieldSample:
    """
    Simulates the ARCH field on an (n + 2B) x (n + 2B) lattice and returns
    the centered n x n window as a triangular field. With normalize=True the
    entries are divided by sigma_hat, a Monte Carlo estimate of the
    stationary standard deviation from an independent calibration stream.
    """
    _check_order(n)
    logger = get_logger(logger)
    rng = rng if rng is not None else RngStream(0)
    size = n + 2 * spec.burn_in
    lattice = _arch_sweep(spec, rng.standard_normal((size, size)))
    b = spec.burn_in
    window = lattice[b : b + n, b : b + n]
    sigma_hat = estimate_arch_sigma(
        spec, rng.seed, rng.stream_id, calibration_samples
    )
    logger.info(f"ARCH field n={n}: sigma_hat = {sigma_hat:.6f}")
    scale = sigma_hat if normalize else 1.0
    profile_value = 1.0 if normalize else sigma_hat**2
    return FieldSample(
        window / scale,
        sigma_hat=sigma_hat,
        declared_profile=np.tril(np.full((n, n), profile_value)),
        provenance={
            "generator": "arch",
            "params": spec.to_dict(),
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "normalized": normalize,
            "calibration_samples": calibration_samples,
        },
    )


def estimate_arch_sigma(
    spec: ArchSpec,
    seed: int,
    stream_id: int = 0,
    samples: int = ARCH_CALIBRATION_SAMPLES,
) -> float:
    """
    Monte Carlo estimate of sqrt(E X_0^2) for the ARCH field, computed on the
    calibration stream paired with (seed, stream_id). The estimate uses
    samples sites and a further samples sites check that the normalized
    field has unit variance. Cached per arguments.
    """
    return _estimate_arch_sigma_cached(spec, seed, stream_id, samples)


@lru_cache(maxsize=64)
def _estimate_arch_sigma_cached(
    spec: ArchSpec, seed: int, stream_id: int, samples: int
) -> float:
    calibration = RngStream(seed, CALIBRATION_STREAM_OFFSET + stream_id)
    side = max(1, math.ceil(math.sqrt(2 * samples)))
    size = side + 2 * spec.burn_in
    lattice = _arch_sweep(spec, calibration.standard_normal((size, size)))
    b = spec.burn_in
    sites = lattice[b : b + side, b : b + side].ravel()
    # estimate on one half, check unit variance on the other
    half = len(sites) // 2
    sigma = float(np.sqrt(np.mean(sites[:half] ** 2)))
    if half > 0:
        check_unit_variance(sites[half:] / sigma, "arch calibration")
    return sigma


def _arch_sweep(spec: ArchSpec, xi: np.ndarray) -> np.ndarray:
    """
    One causal sweep in lexicographic order: row by row, and within a row
    column by column. Sites outside the lattice count as zero.
    """
    size = xi.shape[0]
    w = spec.window
    offsets, alphas = spec.coefficients()
    # row kernels for k >= 1, indexed by l + W
    kernels = np.zeros((w + 1, 2 * w + 1))
    for (k, ell), alpha in zip(offsets, alphas):
        kernels[k, ell + w] = alpha
    same_row = [float(a) for a in kernels[0, w + 1 :]]
    field = np.zeros((size, size))
    squashed = np.zeros((size, size))
    for i in range(size):
        base = np.full(size, spec.c)
        for k in range(1, min(w, i) + 1):
            conv = np.convolve(squashed[i - k], kernels[k])
            base += conv[w : w + size]
        row_xi = xi[i].tolist()
        row_base = base.tolist()
        row_tanh = [0.0] * size
        row_vals = [0.0] * size
        for j in range(size):
            vol = row_base[j]
            for ell in range(1, min(w, j) + 1):
                vol += same_row[ell - 1] * row_tanh[j - ell]
            x = row_xi[j] * vol
            row_vals[j] = x
            row_tanh[j] = math.tanh(x)
        field[i] = row_vals
        squashed[i] = row_tanh
    return field


### ARCH(1) MARTINGALE DIFFERENCES ############################################


def check_arch1_params(omega: float, beta: float) -> None:
    """Rejects ARCH(1) parameters without a finite fourth moment."""
    if omega <= 0:
        raise ValueError("ARCH(1) omega must be positive.")
    if beta < 0:
        raise ValueError("ARCH(1) beta must be non-negative.")
    if 3 * beta**2 >= 1:
        raise ValueError(
            f"ARCH(1) beta = {beta} violates 3 beta^2 < 1: "
            + "the fourth moment is infinite."
        )


def arch1_stationary_variance(omega: float, beta: float) -> float:
    """E D^2 = omega / (1 - beta) for the stationary ARCH(1) sequence."""
    check_arch1_params(omega, beta)
    return omega / (1 - beta)


def arch1_sequence(
    length: int,
    omega: float,
    beta: float,
    rng: RngStream,
    burn_in: int = ARCH1_BURN_IN,
) -> np.ndarray:
    """
    The ARCH(1) martingale difference sequence
    D_i = eps_i (omega + beta D_{i-1}^2)^{1/2}, started from D_0 = 0, with the
    first burn_in terms discarded.
    """
    check_arch1_params(omega, beta)
    eps = rng.standard_normal(burn_in + length).tolist()
    out = [0.0] * (burn_in + length)
    d = 0.0
    for t, e in enumerate(eps):
        d = e * math.sqrt(omega + beta * d * d)
        out[t] = d
    return np.array(out[burn_in:])


def gen_martingale_matrix_fill(
    n: int,
    arch1: tuple[float, float],
    rng: Optional[RngStream] = None,
    burn_in: int = ARCH1_BURN_IN,
) -> FieldSample:
    """
    Places the ARCH(1) sequence D_1, ..., D_{k_n} on the lower triangle, with
    D_{u(i,j)} at position (i, j) where u(i, j) = i(i-1)/2 + j, and divides by
    the stationary standard deviation sqrt(omega / (1 - beta)).
    """
    _check_order(n)
    omega, beta = arch1
    rng = rng if rng is not None else RngStream(0)
    if burn_in < ARCH1_BURN_IN:
        raise ValueError(f"ARCH(1) burn-in must be at least {ARCH1_BURN_IN}.")
    d = arch1_sequence(num_positions(n), omega, beta, rng, burn_in)
    sigma = math.sqrt(arch1_stationary_variance(omega, beta))
    d /= sigma
    if len(d) >= UNIT_VARIANCE_MIN_SAMPLES:
        check_unit_variance(d, "martingale matrix fill")
    # tril_indices enumerates the lower triangle in lexicographic order
    entries = np.zeros((n, n))
    rows, cols = np.tril_indices(n)
    entries[rows, cols] = d
    return FieldSample(
        entries,
        sigma_hat=sigma,
        declared_profile=np.tril(np.ones((n, n))),
        provenance={
            "generator": "martingale-fill",
            "params": {"omega": omega, "beta": beta, "burn_in": burn_in},
            "seed": rng.seed,
            "stream_id": rng.stream_id,
        },
    )


def gen_panel(
    p: int,
    n: int,
    arch1: tuple[float, float],
    rng: Optional[RngStream] = None,
    burn_in: int = ARCH1_BURN_IN,
) -> FieldSample:
    """
    A p x n panel of independent unit-normalized ARCH(1) rows. Row i
    (1-based) draws its innovations from stream id i under the seed of rng.
    """
    _check_order(p)
    _check_order(n)
    omega, beta = arch1
    check_arch1_params(omega, beta)
    rng = rng if rng is not None else RngStream(0)
    eps = np.empty((p, burn_in + n))
    for i in range(p):
        eps[i] = rng.spawn(i + 1).standard_normal(burn_in + n)
    # rows are independent, so the recursion runs over time for all rows
    d = np.zeros(p)
    panel = np.empty((p, n))
    for t in range(burn_in + n):
        d = eps[:, t] * np.sqrt(omega + beta * d * d)
        if t >= burn_in:
            panel[:, t - burn_in] = d
    sigma = math.sqrt(arch1_stationary_variance(omega, beta))
    panel /= sigma
    if panel.size >= UNIT_VARIANCE_MIN_SAMPLES:
        check_unit_variance(panel.ravel(), "panel")
    return FieldSample(
        panel,
        rectangular=True,
        sigma_hat=sigma,
        declared_profile=np.ones((p, n)),
        provenance={
            "generator": "panel",
            "params": {
                "p": p,
                "omega": omega,
                "beta": beta,
                "burn_in": burn_in,
            },
            "seed": rng.seed,
            "stream_id": rng.stream_id,
        },
    )


### HELPERS ###################################################################


def check_unit_variance(
    samples: np.ndarray, label: str, logger: Optional[Logger] = None
) -> bool:
    """
    Checks that the second moment of unit-normalized samples lies in the unit
    variance band; logs a warning and returns False otherwise.
    """
    second_moment = float(np.mean(np.asarray(samples) ** 2))
    lo, hi = UNIT_VARIANCE_BAND
    if lo <= second_moment <= hi:
        return True
    get_logger(logger).warning(
        f"{label}: normalized variance {second_moment:.4f} outside [{lo}, {hi}]"
    )
    return False


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)):
        raise TypeError("Dimensions must be integers.")
    if n < 1:
        raise ValueError("Dimensions must be positive.")
