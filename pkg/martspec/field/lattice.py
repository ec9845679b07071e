"""
Module for the index geometry of lower-triangular matrix positions.

Positions (i, j) with 1 <= j <= i <= n are enumerated in lexicographic order,
row by row, so that position (i, j) receives the linear index
i(i-1)/2 + j. The past cone of a position (i, j) with radius a collects the
lexicographic predecessors of (i, j) at Chebyshev distance at least a; these
index sets generate the filtrations of the martingale difference conditions.
All indices are 1-based.
"""

from __future__ import annotations

from math import isqrt
from typing import Iterator

Pair = tuple[int, int]


def lex_leq(p: Pair, q: Pair) -> bool:
    """Returns True if p <=_lex q."""
    return p[0] < q[0] or (p[0] == q[0] and p[1] <= q[1])


def lex_less(p: Pair, q: Pair) -> bool:
    """Returns True if p <_lex q."""
    return p != q and lex_leq(p, q)


def chebyshev(p: Pair, q: Pair) -> int:
    """Chebyshev (max-coordinate) distance between two pairs."""
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def num_positions(n: int) -> int:
    """Returns k_n = n(n+1)/2, the number of lower-triangular positions."""
    return n * (n + 1) // 2


def lex_index(i: int, j: int) -> int:
    """Returns the linear index i(i-1)/2 + j of the position (i, j)."""
    if not isinstance(i, int) or not isinstance(j, int):
        raise TypeError("Indices must be integers.")
    if i < 1 or j < 1:
        raise ValueError(f"Indices must be positive, got ({i}, {j}).")
    if j > i:
        raise ValueError(f"Position ({i}, {j}) is above the diagonal.")
    return i * (i - 1) // 2 + j


def lex_pair(ell: int, n: int | None = None) -> Pair:
    """
    Returns the position (i, j) with linear index ell. When n is given, ell
    must lie in [1, k_n].
    """
    if not isinstance(ell, int):
        raise TypeError("Linear index must be an integer.")
    if ell < 1:
        raise ValueError(f"Linear index must be positive, got {ell}.")
    if n is not None and ell > num_positions(n):
        raise ValueError(
            f"Linear index {ell} exceeds k_n = {num_positions(n)}."
        )
    # largest i with i(i-1)/2 < ell
    i = (1 + isqrt(8 * ell - 7)) // 2
    j = ell - i * (i - 1) // 2
    return i, j


class LatticeIndex:
    """Lexicographic enumeration of the lower triangle of an n x n matrix."""

    n: int
    k_n: int

    def __init__(self, n: int) -> None:
        if not isinstance(n, int):
            raise TypeError("Matrix order must be an integer.")
        if n < 1:
            raise ValueError("Matrix order must be positive.")
        self.n = n
        self.k_n = num_positions(n)

    def __repr__(self) -> str:
        return f"LatticeIndex(n={self.n})"

    def __len__(self) -> int:
        return self.k_n

    def lex_index(self, i: int, j: int) -> int:
        """Linear index of (i, j), checked against the matrix order."""
        if i > self.n:
            raise ValueError(f"Row {i} exceeds the order {self.n}.")
        return lex_index(i, j)

    def lex_pair(self, ell: int) -> Pair:
        """Position with linear index ell in [1, k_n]."""
        return lex_pair(ell, self.n)

    def positions(self) -> Iterator[Pair]:
        """Iterates over all positions in lexicographic order."""
        for i in range(1, self.n + 1):
            for j in range(1, i + 1):
                yield i, j


class PastCone:
    """
    The index set B_ij^a of pairs (u, v) in Z^2 with (u, v) <=_lex (i, j)
    and max(|u - i|, |v - j|) >= a.
    """

    center: Pair
    radius: int

    def __init__(self, center: Pair, radius: int) -> None:
        if radius < 0:
            raise ValueError("Radius must be non-negative.")
        self.center = (int(center[0]), int(center[1]))
        self.radius = radius

    def __repr__(self) -> str:
        return f"PastCone(center={self.center}, radius={self.radius})"

    def __contains__(self, pair: Pair) -> bool:
        return self.contains(pair[0], pair[1])

    def contains(self, u: int, v: int) -> bool:
        """Membership predicate of the cone."""
        return lex_leq((u, v), self.center) and (
            chebyshev((u, v), self.center) >= self.radius
        )

    def is_subset_of(self, other: PastCone) -> bool:
        """
        True when every member of this cone belongs to other. Cones with a
        common center are nested in reverse order of their radii.
        """
        return self.center == other.center and self.radius >= other.radius


def ring_set(center: Pair, a: int, n: int) -> list[Pair]:
    """
    Returns the lower-triangle pairs of B_ij^1 minus B_ij^a, that is the
    lexicographic predecessors (u, v) of the center with v <= u and
    1 <= max(|u - i|, |v - j|) < a, sorted in lex order.
    """
    i, j = center
    if a < 1:
        raise ValueError("Ring radius must be at least 1.")
    if not 1 <= j <= i <= n:
        raise ValueError(f"Center {center} is not in the lower triangle.")
    pairs = []
    for u in range(max(1, i - a + 1), i + 1):
        for v in range(max(1, j - a + 1), min(u, j + a - 1) + 1):
            if (u, v) == (i, j):
                continue
            if lex_less((u, v), center) and chebyshev((u, v), center) < a:
                pairs.append((u, v))
    return pairs


def ring_position_sets(n: int, a: int) -> list[list[int]]:
    """
    For each linear index ell = 1, ..., k_n, the 0-based positions (ell - 1
    convention) of the ring set of lex_pair(ell).
    """
    lattice = LatticeIndex(n)
    return [
        [lex_index(u, v) - 1 for u, v in ring_set(pair, a, n)]
        for pair in lattice.positions()
    ]
