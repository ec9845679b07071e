"""
Module for Wachter Q-Q data: ordered eigenvalues against the quantiles of a
limit law.
"""

from typing import Any

import numpy as np

from ..spectra import SpectralSample

# extreme points excluded per side when summarizing a Q-Q plot
QQ_TRIM = 5


def qq_data(s: SpectralSample, law: Any) -> list[tuple[float, float]]:
    """
    Row k pairs the law quantile at (k - 1/2)/n with the k-th smallest
    eigenvalue. The law needs a vectorized quantile method; quantiles inside
    the mass range of an atom return the atom location.
    """
    levels = (np.arange(1, s.n + 1) - 0.5) / s.n
    q = np.asarray(law.quantile(levels), dtype=float)
    return list(zip(q.tolist(), s.values.tolist()))


def qq_max_gap(rows: list[tuple[float, float]], trim: int = QQ_TRIM) -> float:
    """max |q_law - lambda| over the rows, without trim points at each end."""
    if trim < 0:
        raise ValueError("trim must be non-negative.")
    if len(rows) <= 2 * trim:
        raise ValueError(
            f"Need more than {2 * trim} rows to trim {trim} per side."
        )
    arr = np.asarray(rows, dtype=float)[trim : len(rows) - trim]
    return float(np.max(np.abs(arr[:, 0] - arr[:, 1])))
