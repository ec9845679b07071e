"""
Module for the entry-field conditions as computable functionals, and the
truncation operator.

All functionals are single-realization analogues of conditions stated in
expectation; the harness averages them over seeds. Triangular fields sum
over the lower triangle, about n^2 / 2 entries, against n^2; rectangular
panels sum over all p n entries against 2 p n, so identically distributed
entries score the same in both layouts.
"""

from __future__ import annotations

import math
from logging import Logger
from typing import Any, Optional

import numpy as np

from ..field.field import FieldSample
from ..log_config import get_logger
from .resolvent import perturbation_rhs, stieltjes_of_vector


def _normalizer(field: FieldSample) -> float:
    if field.rectangular:
        return float(2 * field.p * field.n)
    return float(field.n**2)


def lindeberg_sum(field: FieldSample, eps: float) -> float:
    """(1/n^2) sum X_ij^2 I(|X_ij| > eps sqrt(n))."""
    if not eps > 0:
        raise ValueError(f"Lindeberg level must be positive, got {eps}.")
    x = field.values()
    threshold = eps * math.sqrt(field.n)
    big = x[np.abs(x) > threshold]
    return math.fsum(big**2) / _normalizer(field)


def variance_deviation(field: FieldSample) -> float:
    """(1/n^2) sum |sigma_ij^2 - 1| over the declared variance profile."""
    return math.fsum(np.abs(field.profile_values() - 1)) / _normalizer(field)


def variance_bound(field: FieldSample) -> float:
    """(1/n^2) sum sigma_ij^2 over the declared variance profile."""
    return math.fsum(field.profile_values()) / _normalizer(field)


def truncate(
    field: FieldSample, eps: float, logger: Optional[Logger] = None
) -> FieldSample:
    """
    T = X I(|X| <= eps sqrt(n)): entries above the threshold in magnitude are
    set to zero. The provenance records eps and the number zeroed.
    """
    if not eps > 0:
        raise ValueError(f"Truncation level must be positive, got {eps}.")
    threshold = eps * math.sqrt(field.n)
    mask = np.abs(field.entries) > threshold
    zeroed = int(np.count_nonzero(mask))
    if zeroed > 0:
        get_logger(logger).info(
            f"truncation at {threshold:.4g} zeroed {zeroed}"
        )
    entries = np.where(mask, 0.0, field.entries)
    return field.with_entries(
        entries, truncation={"eps": eps, "zeroed": zeroed}
    )


def truncation_effect(
    field: FieldSample, eps: float, z: complex
) -> dict[str, Any]:
    """
    |s(X) - s(T)| for the truncated field T, next to the perturbation bound
    for the pair (X, T).
    """
    if field.rectangular:
        raise ValueError(
            "Truncation effects are defined for triangular fields."
        )
    truncated = truncate(field, eps)
    x = field.to_triangular_vector()
    t = truncated.to_triangular_vector()
    lhs = abs(stieltjes_of_vector(x, z) - stieltjes_of_vector(t, z))
    return {
        "eps": eps,
        "zeroed": truncated.provenance["truncation"]["zeroed"],
        "lhs": lhs,
        "rhs": perturbation_rhs(x, t, z),
    }
