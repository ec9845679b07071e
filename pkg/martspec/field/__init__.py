"""FIELD

This subpackage contains the entry-field layer: the lexicographic index
geometry of lower-triangular positions and their past cones, seeded random
streams, the realized field container, and the generators for Gaussian,
ARCH field, martingale-filled and panel entries.
"""

from .field import FieldSample
from .generate import (
    ArchSpec,
    arch1_sequence,
    arch1_stationary_variance,
    estimate_arch_sigma,
    gen_arch_field,
    gen_gaussian_field,
    gen_gaussian_panel,
    gen_martingale_matrix_fill,
    gen_panel,
    sample_profile_from_sequence,
)
from .lattice import (
    LatticeIndex,
    PastCone,
    lex_index,
    lex_leq,
    lex_less,
    lex_pair,
    num_positions,
    ring_position_sets,
    ring_set,
)
from .rng import RngStream

# essential
__all__ = [
    "FieldSample",
    "RngStream",
    "LatticeIndex",
    "PastCone",
    "lex_index",
    "lex_pair",
    "ring_set",
]

# generators
__all__ += [
    "ArchSpec",
    "arch1_sequence",
    "arch1_stationary_variance",
    "estimate_arch_sigma",
    "gen_arch_field",
    "gen_gaussian_field",
    "gen_gaussian_panel",
    "gen_martingale_matrix_fill",
    "gen_panel",
    "sample_profile_from_sequence",
]

# lattice helpers
__all__ += [
    "lex_leq",
    "lex_less",
    "num_positions",
    "ring_position_sets",
]
