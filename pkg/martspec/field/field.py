"""
Module for representing realized entry fields.

A field is either triangular, holding X_ij for 1 <= j <= i <= n in the lower
triangle of an n x n array (the strict upper triangle is zero and ignored),
or rectangular, holding a full p x n panel. Alongside the entries a field
carries the standard deviation used to normalize it, the generator's declared
variance profile (when it has one) and a provenance record.
"""

from __future__ import annotations

from copy import deepcopy
from typing import Any, Optional

import numpy as np

from .lattice import num_positions


class FieldSample:
    """A realized array of real entries with generation metadata."""

    entries: np.ndarray
    rectangular: bool
    sigma_hat: float
    declared_profile: Optional[np.ndarray]
    provenance: dict[str, Any]

    def __init__(
        self,
        entries: np.ndarray,
        rectangular: bool = False,
        sigma_hat: float = 1.0,
        declared_profile: Optional[np.ndarray] = None,
        provenance: Optional[dict[str, Any]] = None,
    ) -> None:
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("Field entries must be a two-dimensional array.")
        if not rectangular and entries.shape[0] != entries.shape[1]:
            raise ValueError("Triangular fields must be stored as n x n.")
        if not np.all(np.isfinite(entries)):
            raise ValueError("Field entries must be finite.")
        if not rectangular:
            entries = np.tril(entries)
        if declared_profile is not None:
            declared_profile = np.asarray(declared_profile, dtype=float)
            if declared_profile.shape != entries.shape:
                raise ValueError("Declared profile must match the entries.")
        self.entries = entries
        self.rectangular = rectangular
        self.sigma_hat = float(sigma_hat)
        self.declared_profile = declared_profile
        self.provenance = provenance if provenance is not None else {}

    def __repr__(self) -> str:
        kind = "rectangular" if self.rectangular else "triangular"
        name = self.provenance.get("generator", "unknown")
        return f"FieldSample({kind}, shape={self.entries.shape}, {name})"

    def __copy__(self) -> FieldSample:
        return FieldSample(
            self.entries.copy(),
            rectangular=self.rectangular,
            sigma_hat=self.sigma_hat,
            declared_profile=(
                None
                if self.declared_profile is None
                else self.declared_profile.copy()
            ),
            provenance=deepcopy(self.provenance),
        )

    @property
    def n(self) -> int:
        """Matrix order (triangular) or number of columns (rectangular)."""
        return int(self.entries.shape[1])

    @property
    def p(self) -> int:
        """Number of rows; equals n for triangular fields."""
        return int(self.entries.shape[0])

    def values(self) -> np.ndarray:
        """
        The free entries as a flat vector: the lower triangle in lex order
        for triangular fields, the row-major panel for rectangular ones.
        """
        if self.rectangular:
            return self.entries.ravel()
        return self.to_triangular_vector()

    def to_triangular_vector(self) -> np.ndarray:
        """The lower-triangle entries in lexicographic order (length k_n)."""
        if self.rectangular:
            raise ValueError("Rectangular fields have no triangular vector.")
        rows, cols = np.tril_indices(self.n)
        return self.entries[rows, cols].copy()

    def profile_values(self) -> np.ndarray:
        """The declared variances aligned with values()."""
        if self.declared_profile is None:
            raise ValueError(
                "Field has no declared variance profile "
                + f"(generator: {self.provenance.get('generator')})."
            )
        if self.rectangular:
            return self.declared_profile.ravel()
        rows, cols = np.tril_indices(self.n)
        return self.declared_profile[rows, cols].copy()

    def with_entries(
        self, entries: np.ndarray, **provenance_updates: Any
    ) -> FieldSample:
        """A copy of this field with new entries and extended provenance."""
        provenance = deepcopy(self.provenance)
        provenance.update(provenance_updates)
        return FieldSample(
            entries,
            rectangular=self.rectangular,
            sigma_hat=self.sigma_hat,
            declared_profile=self.declared_profile,
            provenance=provenance,
        )

    @classmethod
    def from_triangular_vector(
        cls, x: np.ndarray, n: int, **kwargs: Any
    ) -> FieldSample:
        """Builds a triangular field from a lex-ordered vector of length k_n."""
        x = np.asarray(x, dtype=float)
        if x.shape != (num_positions(n),):
            raise ValueError(
                f"Expected a vector of length {num_positions(n)}, "
                + f"got shape {x.shape}."
            )
        entries = np.zeros((n, n))
        rows, cols = np.tril_indices(n)
        entries[rows, cols] = x
        return cls(entries, rectangular=False, **kwargs)
