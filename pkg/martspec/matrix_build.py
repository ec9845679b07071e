"""
Module for assembling the three ensembles from entry fields:

- the normalized symmetric (Wigner-type) matrix n^{-1/2} X_n, with
  (X_n)_ij = X_ij for i >= j mirrored above the diagonal;
- the sample covariance matrix A = X X^T / n of a p x n panel;
- the symmetrized block matrix B_N = n^{-1/2} [[0, X^T], [X, 0]] of order
  N = n + p, whose Stieltjes transform determines that of A.
"""

from __future__ import annotations

import math
from copy import deepcopy
from typing import Any, Optional, Union

import numpy as np

from .field.field import FieldSample
from .field.lattice import num_positions
from .file_io import save_csv, save_matrix
from .spectra import (
    SpectralSample,
    check_upper,
    eigenvalues,
    stieltjes_from_eigs,
)


class SymMatrix:
    """
    A dense real symmetric matrix. The lower triangle given at construction
    is authoritative and is mirrored above the diagonal, so symmetry is exact.

    When a covariance matrix is built with more rows than columns, the
    companion attribute holds the exchanged n x n Gram matrix X^T X / n,
    whose eigenvalues together with p - n zeros make up the spectrum.
    """

    n: int
    data: np.ndarray
    metadata: dict[str, Any]
    companion: Optional[np.ndarray]

    def __init__(
        self,
        lower: np.ndarray,
        metadata: Optional[dict[str, Any]] = None,
        companion: Optional[np.ndarray] = None,
    ) -> None:
        lower = np.asarray(lower, dtype=float)
        if lower.ndim != 2 or lower.shape[0] != lower.shape[1]:
            raise ValueError("Symmetric matrices must be square.")
        if not np.all(np.isfinite(lower)):
            raise ValueError("Matrix entries must be finite.")
        lower = np.tril(lower)
        self.data = lower + np.tril(lower, -1).T
        self.n = int(lower.shape[0])
        self.metadata = metadata if metadata is not None else {}
        self.companion = companion

    def __repr__(self) -> str:
        ensemble = self.metadata.get("ensemble", "custom")
        return f"SymMatrix(n={self.n}, {ensemble})"

    def __copy__(self) -> SymMatrix:
        return SymMatrix(
            self.data.copy(),
            metadata=deepcopy(self.metadata),
            companion=None if self.companion is None else self.companion.copy(),
        )

    @classmethod
    def from_triangular_vector(cls, x: np.ndarray, n: int) -> SymMatrix:
        """
        The map x -> A_n(x) from a lex-ordered vector of length k_n to the
        normalized symmetric matrix with entries x_ij / sqrt(n).
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (num_positions(n),):
            raise ValueError(
                f"Expected a vector of length {num_positions(n)}, "
                + f"got {x.shape}."
            )
        lower = np.zeros((n, n))
        rows, cols = np.tril_indices(n)
        lower[rows, cols] = x / math.sqrt(n)
        return cls(lower, metadata={"ensemble": "wigner"})

    def frobenius_norm(self) -> float:
        """The Frobenius norm of the full matrix."""
        return float(np.linalg.norm(self.data))

    def save(self, filename: str) -> None:
        """Dense float64 .npy export."""
        save_matrix(self.data, filename)

    def to_csv(self, filename: str) -> None:
        """Comma-separated rows, for debugging."""
        header = [f"c{k + 1}" for k in range(self.n)]
        save_csv(filename, header, self.data.tolist())


class RectMatrix:
    """A dense real p x n matrix."""

    p: int
    n: int
    data: np.ndarray

    def __init__(self, data: np.ndarray) -> None:
        data = np.asarray(data, dtype=float)
        if data.ndim != 2:
            raise ValueError("Rectangular matrices must be two-dimensional.")
        if min(data.shape) < 1:
            raise ValueError("Rectangular matrices must be non-empty.")
        if not np.all(np.isfinite(data)):
            raise ValueError("Matrix entries must be finite.")
        self.data = data
        self.p, self.n = (int(s) for s in data.shape)

    def __repr__(self) -> str:
        return f"RectMatrix(p={self.p}, n={self.n})"

    @property
    def ratio(self) -> float:
        """The dimension ratio y = p / n."""
        return self.p / self.n


Panel = Union[RectMatrix, FieldSample, np.ndarray]


def as_rect(X: Panel) -> RectMatrix:
    """Coerce a rectangular field, a RectMatrix or a plain array."""
    if isinstance(X, RectMatrix):
        return X
    if isinstance(X, FieldSample):
        if not X.rectangular:
            raise ValueError("Covariance ensembles need a rectangular field.")
        return RectMatrix(X.entries)
    return RectMatrix(X)


def build_wigner(field: FieldSample) -> SymMatrix:
    """
    The normalized symmetric matrix with entries X_ij / sqrt(n) for i >= j,
    mirrored above the diagonal.
    """
    if field.rectangular:
        raise ValueError("Wigner ensembles need a triangular field.")
    n = field.n
    return SymMatrix(
        field.entries / math.sqrt(n),
        metadata={
            "ensemble": "wigner",
            "generator": field.provenance.get("generator"),
        },
    )


def build_cov(X: Panel) -> SymMatrix:
    """
    The sample covariance matrix A = X X^T / n of order p. When p > n the
    roles of X and X^T are exchanged internally: the spectrum is taken from
    the n x n matrix X^T X / n padded with p - n zeros, and metadata records
    exchanged=True.
    """
    X = as_rect(X)
    A = X.data @ X.data.T / X.n
    exchanged = X.p > X.n
    companion = X.data.T @ X.data / X.n if exchanged else None
    return SymMatrix(
        A,
        metadata={
            "ensemble": "covariance",
            "p": X.p,
            "n": X.n,
            "exchanged": exchanged,
        },
        companion=companion,
    )


def build_sym_bn(X: Panel) -> SymMatrix:
    """The block matrix n^{-1/2} [[0, X^T], [X, 0]] of order N = n + p."""
    X = as_rect(X)
    N = X.n + X.p
    lower = np.zeros((N, N))
    lower[X.n :, : X.n] = X.data / math.sqrt(X.n)
    return SymMatrix(
        lower,
        metadata={"ensemble": "symmetrized", "p": X.p, "n": X.n},
    )


def stieltjes_cov_via_bn(X: Panel, z: complex) -> complex:
    """
    The Stieltjes transform of A = X X^T / n evaluated through B_N:

        S_A(z) = z^{-1/2} (N / 2p) S_{B_N}(z^{1/2}) + (n - p) / (2pz),

    with the principal square root, which maps the upper half-plane into the
    first quadrant. The constant term is (n - p)/(2pz): the |n - p| zero
    eigenvalues of B_N and the p - r zero eigenvalues of A (r the rank)
    balance only with this sign. When p > n the identity is applied to X^T
    and converted back.
    """
    z = check_upper(z)
    X = as_rect(X)
    if X.p > X.n:
        # X X^T / n has the eigenvalues of X^T X / n plus p - n zeros
        s_gram = _cov_via_bn(RectMatrix(X.data.T), z, scale=X.n)
        return (X.n * s_gram - (X.p - X.n) / z) / X.p
    return _cov_via_bn(X, z, scale=X.n)


def _cov_via_bn(X: RectMatrix, z: complex, scale: int) -> complex:
    """
    The identity for a panel with X.p <= X.n rows, normalized by scale
    columns.
    """
    N = X.n + X.p
    lower = np.zeros((N, N))
    lower[X.n :, : X.n] = X.data / math.sqrt(scale)
    w = np.sqrt(complex(z))
    s_bn = stieltjes_from_eigs(eigenvalues(SymMatrix(lower)), w)
    return complex(s_bn * N / (2 * X.p * w) + (X.n - X.p) / (2 * X.p * z))


def cov_eigenvalues_from_bn(
    s: SpectralSample, p: int, n: int
) -> SpectralSample:
    """
    The spectrum of A = X X^T / n recovered from that of B_N: the eigenvalues
    of B_N are the +/- singular values of X / sqrt(n) and |n - p| zeros, so A
    has the squares of the min(p, n) largest ones and p - min(p, n) zeros.
    """
    if len(s) != n + p:
        raise ValueError(f"Expected {n + p} eigenvalues of B_N, got {len(s)}.")
    m = min(p, n)
    top = np.clip(s.values[len(s) - m :], 0.0, None) ** 2
    values = np.sort(np.concatenate([np.zeros(p - m), top]))
    return SpectralSample(values)
