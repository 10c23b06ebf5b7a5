"""Value types for poisson-bv."""

from poisson_bv.models.roots import (
    GenericityReport,
    GenericityViolation,
    ModelId,
    RootDatum,
    SpectralParameter,
    WeylOrbit,
)
from poisson_bv.models.series import DeltaLayer, FixedPointSolution, FormalSeries, MonicPolynomial
from poisson_bv.models.operator import DividedThetaOperator, MatrixThetaOperator, ThetaOperator
from poisson_bv.models.space import (
    BoundaryPoint,
    CornerCoordinates,
    GroupElement,
    IwasawaDecomposition,
    SpaceModel,
    SpacePoint,
)
from poisson_bv.models.boundary import (
    AsymptoticExpansion,
    BoundaryFunction,
    DeltaExtraction,
    EquivarianceResult,
    ExpansionTerm,
    ExtractionConfig,
    ExtractionResult,
    FatouResult,
    InversionPoint,
    InversionReport,
)
from poisson_bv.models.config import RunConfig

__all__ = [
    "ModelId",
    "RootDatum",
    "SpectralParameter",
    "WeylOrbit",
    "GenericityReport",
    "GenericityViolation",
    "MonicPolynomial",
    "FormalSeries",
    "DeltaLayer",
    "FixedPointSolution",
    "ThetaOperator",
    "DividedThetaOperator",
    "MatrixThetaOperator",
    "SpaceModel",
    "GroupElement",
    "SpacePoint",
    "BoundaryPoint",
    "CornerCoordinates",
    "IwasawaDecomposition",
    "BoundaryFunction",
    "ExtractionConfig",
    "ExpansionTerm",
    "AsymptoticExpansion",
    "ExtractionResult",
    "DeltaExtraction",
    "InversionPoint",
    "InversionReport",
    "FatouResult",
    "EquivarianceResult",
    "RunConfig",
]
