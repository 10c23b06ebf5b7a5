"""
Module-level functions for the common operations.

Models are built on first use and cached per (model id, h3 flag).
"""

import logging
import threading

import numpy as np

from poisson_bv.engines import boundary, fuchsian, geometry, rootdata, transforms
from poisson_bv.models.boundary import (
    BoundaryFunction,
    EquivarianceResult,
    ExtractionConfig,
    FatouResult,
    InversionReport,
)
from poisson_bv.models.operator import ThetaOperator
from poisson_bv.models.roots import GenericityReport, ModelId
from poisson_bv.models.series import DeltaLayer, FormalSeries
from poisson_bv.models.space import BoundaryPoint, CornerCoordinates, SpaceModel

logger = logging.getLogger(__name__)

_models: dict[tuple[ModelId, bool], SpaceModel] = {}
_models_lock = threading.Lock()


def get_model(model_id: str | ModelId, enable_h3: bool | None = None) -> SpaceModel:
    """Cached space model (lazy initialization)."""
    key = (ModelId(model_id), geometry.h3_enabled(enable_h3))
    with _models_lock:
        if key not in _models:
            _models[key] = geometry.build_space_model(key[0], enable_h3=key[1])
            logger.debug(f"Built space model {key[0].value}")
        return _models[key]


def corner_point(model: SpaceModel, b, t) -> CornerCoordinates:
    return CornerCoordinates(b=BoundaryPoint(model.model_id, np.asarray(b, dtype=float)), t=t)


def exponents(model_id: str | ModelId, lam, enable_h3: bool | None = None) -> list[np.ndarray]:
    """Characteristic exponents rho - w . lambda in Weyl element order."""
    model = get_model(model_id, enable_h3)
    return rootdata.characteristic_exponents(model.root_datum, lam)


def check_genericity(
    model_id: str | ModelId, lam, enable_h3: bool | None = None
) -> GenericityReport:
    return rootdata.genericity_check(get_model(model_id, enable_h3).root_datum, lam)


def poisson_eval(
    model_id: str | ModelId,
    lam,
    f: BoundaryFunction,
    b,
    t,
    enable_h3: bool | None = None,
) -> complex:
    """(P_lambda f) at the corner coordinates (b, t)."""
    model = get_model(model_id, enable_h3)
    x = geometry.from_corner(model, corner_point(model, b, t))
    return transforms.poisson_transform(model, lam, f, x)


def spherical(model_id: str | ModelId, lam, t, enable_h3: bool | None = None) -> complex:
    """phi_lambda at radial coordinates t (the boundary angle is irrelevant)."""
    model = get_model(model_id, enable_h3)
    b = boundary.base_point(model)
    x = geometry.from_corner(model, CornerCoordinates(b=b, t=t))
    return transforms.spherical_function(model, lam, x)


def c_function(
    model_id: str | ModelId,
    lam,
    cfg: ExtractionConfig | None = None,
    enable_h3: bool | None = None,
) -> dict[str, complex]:
    """c(lambda) by the N-bar integral, by the boundary value of phi_lambda and in closed form."""
    model = get_model(model_id, enable_h3)
    return {
        "integral": transforms.c_function_integral(model, lam),
        "bv": boundary.c_function_via_bv(model, lam, cfg),
        "closed_form": transforms.c_function_closed_form(model, lam),
    }


def boundary_values(
    model_id: str | ModelId,
    lam,
    f: BoundaryFunction,
    grid: int,
    cfg: ExtractionConfig | None = None,
    threads: int | None = None,
    enable_h3: bool | None = None,
) -> BoundaryFunction:
    """bv_{rho - lambda}(P_lambda f) on a uniform boundary grid (a constant on h3)."""
    model = get_model(model_id, enable_h3)
    u = transforms.PoissonEvaluator(model, lam, f).at_corner
    return boundary.boundary_value(model, lam, u, grid, cfg, threads=threads)


def verify_inversion(
    model_id: str | ModelId,
    lam,
    f: BoundaryFunction,
    cfg: ExtractionConfig | None = None,
    grid: int | None = None,
    enable_h3: bool | None = None,
    threads: int | None = None,
) -> InversionReport:
    model = get_model(model_id, enable_h3)
    return boundary.verify_inversion(model, lam, f, cfg, grid=grid, threads=threads)


def equivariance_checks(
    model_id: str | ModelId,
    lam,
    f: BoundaryFunction,
    count: int,
    seed: int = 0,
    cfg: ExtractionConfig | None = None,
    enable_h3: bool | None = None,
) -> list[EquivarianceResult]:
    """Spot-check bv equivariance for `count` random group elements near the identity."""
    model = get_model(model_id, enable_h3)
    rng = np.random.default_rng(seed)
    return [
        boundary.verify_equivariance(model, lam, f, geometry.random_group_element(model, rng), cfg)
        for _ in range(count)
    ]


def fatou(
    model_id: str | ModelId,
    lam,
    f: BoundaryFunction,
    b,
    cfg: ExtractionConfig | None = None,
    enable_h3: bool | None = None,
) -> FatouResult:
    model = get_model(model_id, enable_h3)
    return boundary.fatou_rate(model, lam, f, BoundaryPoint(model.model_id, b), cfg)


def fuchs_solve(P: ThetaOperator, f: FormalSeries, N: int | None = None) -> FormalSeries:
    """Formal solution of P u = f."""
    return fuchsian.solve_formal(P, f, N)


def fuchs_delta(P: ThetaOperator, f: DeltaLayer) -> DeltaLayer:
    """Delta-layer solution of P v = f."""
    return fuchsian.solve_delta_layer(P, f)

