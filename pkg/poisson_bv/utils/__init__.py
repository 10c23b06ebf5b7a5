"""Errors, quadrature rules and file storage for poisson-bv."""

from poisson_bv.utils.errors import NumericalError, PoissonBVError, PreconditionError
from poisson_bv.utils.storage import (
    ConfigStorage,
    ConfigStorageError,
    ConfigValidationError,
    CorruptedConfigError,
)

__all__ = [
    "PoissonBVError",
    "PreconditionError",
    "NumericalError",
    "ConfigStorage",
    "ConfigStorageError",
    "CorruptedConfigError",
    "ConfigValidationError",
]
