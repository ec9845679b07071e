"""DIAGNOSTICS

This subpackage contains the distances between distribution functions, the
entry-field conditions as computable functionals, the truncation operator,
the resolvent derivative calculus with the perturbation inequality, and the
Lindeberg swap and Gaussian interpolation diagnostics.
"""

from .conditions import (
    lindeberg_sum,
    truncate,
    truncation_effect,
    variance_bound,
    variance_deviation,
)
from .metrics import kolmogorov_distance, levy_distance
from .resolvent import (
    BoundViolation,
    coordinate_derivative,
    derivative_constants,
    finite_difference_partials,
    fit_derivative_constant,
    partials_of_vector,
    perturbation_bound_check,
    perturbation_rhs,
    rate_exponent,
    resolvent_partials,
    stieltjes_of_vector,
)
from .swap import (
    InterpolationCheck,
    SwapReport,
    gaussian_interpolation_check,
    swap_decomposition,
)

__all__ = [
    "BoundViolation",
    "InterpolationCheck",
    "SwapReport",
    "coordinate_derivative",
    "derivative_constants",
    "finite_difference_partials",
    "fit_derivative_constant",
    "gaussian_interpolation_check",
    "kolmogorov_distance",
    "levy_distance",
    "lindeberg_sum",
    "partials_of_vector",
    "perturbation_bound_check",
    "perturbation_rhs",
    "rate_exponent",
    "resolvent_partials",
    "stieltjes_of_vector",
    "swap_decomposition",
    "truncate",
    "truncation_effect",
    "variance_bound",
    "variance_deviation",
]
