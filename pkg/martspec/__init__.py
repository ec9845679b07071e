"""MARTSPEC

This package is a numerical laboratory for the spectral limits of random
matrices whose entries form martingale difference fields: symmetric
(Wigner-type) matrices, sample covariance matrices and their symmetrized
block form. The `field` subpackage generates entry fields, `diagnostics`
measures distances and checks the inequalities behind the limit theorems,
and `harness` runs configured experiments from the command line.
"""

from . import diagnostics, field, harness
from .harness.experiment_config import VERSION as __version__
from .limit_laws import (
    empirical_measure,
    marchenko_pastur,
    semicircle,
    vp_cdf,
    vp_fixed_point,
)
from .matrix_build import (
    build_cov,
    build_sym_bn,
    build_wigner,
    stieltjes_cov_via_bn,
)
from .spectra import eigenvalues, esd, stieltjes_from_eigs, stieltjes_resolvent

__all__ = [
    "__version__",
    "build_cov",
    "build_sym_bn",
    "build_wigner",
    "diagnostics",
    "eigenvalues",
    "empirical_measure",
    "esd",
    "field",
    "harness",
    "marchenko_pastur",
    "semicircle",
    "stieltjes_cov_via_bn",
    "stieltjes_from_eigs",
    "stieltjes_resolvent",
    "vp_cdf",
    "vp_fixed_point",
]
