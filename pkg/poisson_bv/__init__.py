"""
poisson-bv - boundary values and inversion of the Poisson transform.

Implements the Poisson transform on hyperbolic corner models (h2, h2 x h2 and,
behind a feature flag, h3), the Fuchsian-type series toolkit behind its edge
asymptotics, and numerical checks of bv_{rho - lambda} P_lambda = c(lambda) id.
"""

__version__ = "0.1.0"
__author__ = "poisson-bv developers"

from poisson_bv.api import (
    boundary_values,
    c_function,
    check_genericity,
    exponents,
    fuchs_delta,
    fuchs_solve,
    get_model,
    poisson_eval,
    spherical,
    verify_inversion,
)

__all__ = [
    "boundary_values",
    "c_function",
    "check_genericity",
    "exponents",
    "fuchs_delta",
    "fuchs_solve",
    "get_model",
    "poisson_eval",
    "spherical",
    "verify_inversion",
]
