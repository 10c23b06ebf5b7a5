"""Exception hierarchy for poisson-bv.

Two families matter to callers: precondition failures (the input lies outside
the region where the construction is valid) and numerical failures (the input
is fine but a quadrature, fit or certificate did not meet its tolerance).
The CLI maps them to exit codes 2 and 3.
"""

from typing import Any


class PoissonBVError(Exception):
    """Base exception for poisson-bv errors."""

    exit_code = 3

    def to_dict(self) -> dict[str, Any]:
        """Structured payload for machine-readable error reports."""
        return {"error": type(self).__name__, "message": str(self)}


class PreconditionError(PoissonBVError):
    """Raised when an input violates the preconditions of an operation."""

    exit_code = 2


class NumericalError(PoissonBVError):
    """Raised when a numerical procedure fails to reach its tolerance."""

    exit_code = 3


class UnsupportedModelError(PreconditionError):
    """Raised for unknown or disabled model ids."""
    pass


class GenericityError(PreconditionError):
    """Raised when a spectral parameter fails the genericity conditions."""

    def __init__(self, message: str, violations: list[dict[str, Any]] | None = None):
        super().__init__(message)
        self.violations = violations or []

    def to_dict(self) -> dict[str, Any]:
        payload = super().to_dict()
        payload["violations"] = self.violations
        return payload


class ResonanceError(PreconditionError):
    """Raised when the indicial polynomial vanishes at a required integer."""

    def __init__(self, message: str, k: int):
        super().__init__(message)
        self.k = k

    def to_dict(self) -> dict[str, Any]:
        payload = super().to_dict()
        payload["k"] = self.k
        return payload


class NotFuchsianError(PreconditionError):
    """Raised when an operator's t^0 slice has lower degree than its order."""
    pass


class NotDivisibleError(PreconditionError):
    """Raised when dividing by t an operator whose indicial polynomial has p(0) != 0."""
    pass


class ChamberError(PreconditionError):
    """Raised when Re(lambda) is not strictly inside the positive chamber."""
    pass


class ModelDomainError(PreconditionError):
    """Raised when a point lies outside the model domain or the open corner chart."""
    pass


class QuadratureError(NumericalError):
    """Raised when a quadrature does not converge after maximal refinement."""
    pass


class FitError(NumericalError):
    """Base class for least-squares extraction failures."""
    pass


class IllConditionedFitError(FitError):
    """Raised when the fit design matrix exceeds the condition threshold."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number

    def to_dict(self) -> dict[str, Any]:
        payload = super().to_dict()
        payload["condition_number"] = self.condition_number
        return payload


class BasisCollisionError(FitError):
    """Raised when two fitted exponents nearly coincide."""
    pass


class CertificationError(NumericalError):
    """Raised when no positive convergence radius can be certified."""
    pass


class AnnihilationError(NumericalError):
    """Raised when an expansion is not annihilated by the radial operators."""
    pass


class ConsistencyError(NumericalError):
    """Raised when two routes to the same quantity disagree beyond tolerance."""
    pass
