"""Boundary value extraction and verification of bv_{rho - lambda} P_lambda = c(lambda) id.

An eigenfunction u near the corner behaves like
sum_w t^{rho - w lambda} (a_w(b) + O(t)); the boundary value is the leading
coefficient a_e(b). Two routes compute it: an exponent-aware least-squares fit
of t^{-sigma} u on a geometric grid, and the distributional route that applies
t_j^{-1} P_j^sigma wall by wall to an asymptotic expansion and reads off the
coefficient of delta(t), which equals p(lambda) a_e.
"""

import logging
import os
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from poisson_bv.engines import geometry, transforms
from poisson_bv.engines.fuchsian import (
    apply_divided_to_extension,
    divide_by_t,
    radial_series,
    shift_conjugate,
)
from poisson_bv.engines.rootdata import (
    coset_representatives,
    exponent_gaps,
    genericity_value,
    require_generic,
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
from poisson_bv.models.roots import ModelId, RootDatum, SpectralParameter
from poisson_bv.models.series import FormalSeries
from poisson_bv.models.space import BoundaryPoint, CornerCoordinates, GroupElement, SpaceModel
from poisson_bv.utils.errors import (
    AnnihilationError,
    BasisCollisionError,
    ConsistencyError,
    IllConditionedFitError,
)

logger = logging.getLogger(__name__)

Eigenfunction = Callable[[BoundaryPoint, np.ndarray], complex]

THREADS_ENV = "POISSON_BV_THREADS"
COND_WARN = 1e6
ANNIHILATION_TOL = 1e-8
CONSISTENCY_TOL = 1e-10
ROUTE_WARN_TOL = 1e-4
INTEGRAL_ROUTE_MARGIN = 0.05
H3_SPREAD_TOL = 1e-6
FATOU_RATE_CAP = 2.0


def worker_count(threads: int | None = None) -> int:
    """Worker cap for per-boundary-point extraction; the argument wins over the environment."""
    if threads is not None:
        return max(1, int(threads))
    raw = os.getenv(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"Ignoring {THREADS_ENV}={raw!r}; using 1 worker")
        return 1


def _prepare(model: SpaceModel, lam) -> SpectralParameter:
    lam = SpectralParameter.coerce(lam, model.rank)
    require_generic(model.root_datum, lam)
    transforms.require_chamber(lam)
    return lam


def base_point(model: SpaceModel) -> BoundaryPoint:
    size = 2 if model.model_id == ModelId.H3 else len(model.factors)
    return BoundaryPoint(model.model_id, np.zeros(size))


def boundary_points(model: SpaceModel, n: int) -> list[BoundaryPoint]:
    """Uniform boundary grid with n points per circle; four fixed points on the h3 sphere."""
    if model.model_id == ModelId.H3:
        sphere_points = [(0.0, 0.0), (np.pi / 2, 0.0), (np.pi / 2, np.pi / 2), (np.pi, 0.0)]
        return [BoundaryPoint(model.model_id, np.array(p)) for p in sphere_points]
    grid = transforms.circle_grid(model, n)
    return [BoundaryPoint(model.model_id, a) for a in grid.reshape(-1, len(model.factors))]


# -- least-squares fit --------------------------------------------------------


@dataclass
class _WallBasis:
    grid: np.ndarray
    exponents: np.ndarray
    design: np.ndarray
    pinv: np.ndarray
    scales: np.ndarray
    condition: float


def _wall_basis(
    rd: RootDatum, lam: SpectralParameter, j: int, cfg: ExtractionConfig, orders: int
) -> _WallBasis:
    """Basis t^{(lambda - w lambda)(H_j) + n}, identity coset first, columns scaled to max 1."""
    gaps = exponent_gaps(rd, lam, j)
    exponents = np.array([-g + n for g in gaps for n in range(orders + 1)], dtype=complex)
    for a in range(len(exponents)):
        for b in range(a + 1, len(exponents)):
            if abs(exponents[a] - exponents[b]) < cfg.collision_tol:
                raise BasisCollisionError(
                    f"Exponents {exponents[a]} and {exponents[b]} on wall {j} nearly coincide"
                )
    cfg.check_basis(j, len(exponents))
    grid = cfg.grid(j)
    design = np.exp(np.outer(np.log(grid), exponents))
    scales = np.max(np.abs(design), axis=0)
    design = design / scales
    condition = float(np.linalg.cond(design))
    if condition > cfg.cond_max:
        raise IllConditionedFitError(
            f"Fit on wall {j} has condition number {condition:.3e} > {cfg.cond_max:.1e}",
            condition,
        )
    if condition > COND_WARN:
        logger.warning(f"Fit on wall {j} is poorly conditioned ({condition:.3e})")
    return _WallBasis(grid, exponents, design, np.linalg.pinv(design), scales, condition)


def _apply_per_axis(matrices: Sequence[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    for axis, m in enumerate(matrices):
        tensor = np.moveaxis(np.tensordot(m, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def _sample(
    u: Eigenfunction, b: BoundaryPoint, grids: Sequence[np.ndarray], sigma: np.ndarray
) -> np.ndarray:
    """t^{-sigma} u(b, t) on the tensor grid."""
    values = np.empty(tuple(len(g) for g in grids), dtype=complex)
    for idx in np.ndindex(*values.shape):
        t = np.array([g[i] for g, i in zip(grids, idx, strict=True)])
        values[idx] = complex(u(b, t)) * np.exp(-np.sum(sigma * np.log(t)))
    return values


def _fit(values: np.ndarray, bases: Sequence[_WallBasis]) -> tuple[complex, float]:
    coeffs = _apply_per_axis([w.pinv for w in bases], values)
    value = coeffs[(0,) * len(bases)] / np.prod([w.scales[0] for w in bases])
    fitted = _apply_per_axis([w.design for w in bases], coeffs)
    residual = float(np.max(np.abs(values - fitted))) / max(float(np.max(np.abs(values))), 1e-300)
    return complex(value), residual


@dataclass
class _FitPlan:
    sigma: np.ndarray
    bases: list[_WallBasis]
    lower: list[_WallBasis] | None


def _fit_plan(model: SpaceModel, lam: SpectralParameter, cfg: ExtractionConfig) -> _FitPlan:
    rd = model.root_datum
    bases = []
    lower: list[_WallBasis] | None = []
    for j in range(1, rd.rank + 1):
        orders = cfg.for_wall(j).correction_orders
        bases.append(_wall_basis(rd, lam, j, cfg, orders))
        if lower is not None and orders >= 1:
            lower.append(_wall_basis(rd, lam, j, cfg, orders - 1))
        else:
            lower = None
    return _FitPlan(sigma=rd.rho - lam.values, bases=bases, lower=lower)


def _extract(plan: _FitPlan, u: Eigenfunction, b: BoundaryPoint) -> ExtractionResult:
    values = _sample(u, b, [w.grid for w in plan.bases], plan.sigma)
    value, residual = _fit(values, plan.bases)
    if plan.lower is not None:
        lower_value, _ = _fit(values, plan.lower)
        error = abs(value - lower_value)
    else:
        error = residual * abs(value)
    return ExtractionResult(
        value=value,
        condition_numbers=[w.condition for w in plan.bases],
        error_estimate=error,
        residual=residual,
        basis_sizes=[len(w.exponents) for w in plan.bases],
    )


def fit_leading(
    model: SpaceModel, lam, u: Eigenfunction, b: BoundaryPoint, cfg: ExtractionConfig | None = None
) -> ExtractionResult:
    """Leading coefficient of u at b with condition numbers and error estimate.

    Raises:
        GenericityError: If lambda fails the genericity conditions
        ChamberError: If Re(lambda) is not in the open positive chamber
        BasisCollisionError: If two basis exponents nearly coincide
        IllConditionedFitError: If a wall's design matrix exceeds cond_max
        ModelDomainError: If the grid leaves the model
    """
    cfg = cfg or ExtractionConfig()
    lam = _prepare(model, lam)
    result = _extract(_fit_plan(model, lam, cfg), u, b)
    logger.debug(
        f"Leading coefficient {result.value} (cond {result.condition_numbers}, "
        f"error {result.error_estimate:.2e})"
    )
    return result


def leading_coefficient(
    model: SpaceModel, lam, u: Eigenfunction, b: BoundaryPoint, cfg: ExtractionConfig | None = None
) -> complex:
    """bv_sigma u at b, sigma = rho - lambda, by least squares on t^{-sigma} u."""
    return fit_leading(model, lam, u, b, cfg).value


def _extract_many(
    model: SpaceModel,
    lam: SpectralParameter,
    u: Eigenfunction,
    points: list[BoundaryPoint],
    cfg: ExtractionConfig,
    threads: int | None,
) -> list[ExtractionResult]:
    plan = _fit_plan(model, lam, cfg)
    workers = worker_count(threads)
    if workers == 1:
        return [_extract(plan, u, b) for b in points]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda b: _extract(plan, u, b), points))


def boundary_value(
    model: SpaceModel,
    lam,
    u: Eigenfunction,
    grid: int,
    cfg: ExtractionConfig | None = None,
    threads: int | None = None,
) -> BoundaryFunction:
    """bv_sigma u sampled on the uniform boundary grid with `grid` points per circle.

    On h3 boundary data is limited to constants: u is extracted on the fixed sphere points
    and the constant boundary value is returned.

    Raises:
        ConsistencyError: If the values on the h3 sphere points are not constant
    """
    cfg = cfg or ExtractionConfig()
    lam = _prepare(model, lam)
    points = boundary_points(model, grid)
    results = _extract_many(model, lam, u, points, cfg, threads)
    worst = max(r.error_estimate for r in results)
    logger.info(f"Extracted {len(results)} boundary values (worst error estimate {worst:.2e})")
    if model.model_id == ModelId.H3:
        return _constant_value(model, results)
    values = np.array([r.value for r in results]).reshape((grid,) * len(model.factors))
    return BoundaryFunction(model.model_id, samples=values)


def _constant_value(model: SpaceModel, results: list[ExtractionResult]) -> BoundaryFunction:
    values = np.array([r.value for r in results])
    mean = complex(np.mean(values))
    spread = float(np.max(np.abs(values - mean)))
    if spread > H3_SPREAD_TOL * max(1.0, abs(mean)):
        raise ConsistencyError(
            f"Boundary values on the h3 sphere points differ by {spread:.3e}; only constants are supported"
        )
    return BoundaryFunction.constant(model.model_id, mean)


# -- expansions and the distributional route ----------------------------------


def _coset_index(rd: RootDatum, w: int, j: int) -> int:
    row = rd.weyl_elements[w][j - 1]
    for r, rep in enumerate(coset_representatives(rd, j)):
        if np.array_equal(rd.weyl_elements[rep][j - 1], row):
            return r
    raise ValueError(f"Weyl element {w} has no coset on wall {j}")


def _wall_series(
    model: SpaceModel, lam: SpectralParameter, j: int, N: int
) -> list[FormalSeries]:
    """Frobenius series of the wall-j radial operator, one per coset of W / W_j."""
    rd = model.root_datum
    P = geometry.radial_operator(model, lam, j)
    return [
        radial_series(P, rd.rho[j - 1] - (rd.weyl_elements[rep] @ lam.values)[j - 1], N)
        for rep in coset_representatives(rd, j)
    ]


def eigenfunction_expansion(
    model: SpaceModel, lam, amplitudes: Mapping[str, complex] | Sequence[complex], N: int
) -> AsymptoticExpansion:
    """Expansion sum_w a_w prod_j t_j^{(rho - w lambda)_j}(1 + ...) of a radial eigenfunction.

    Args:
        model: Space model
        lam: Spectral parameter
        amplitudes: a_w keyed by Weyl label, or listed in Weyl element order
        N: Series truncation

    Raises:
        ResonanceError: If an exponent resonates within the truncation
    """
    rd = model.root_datum
    lam = SpectralParameter.coerce(lam, rd.rank)
    if not isinstance(amplitudes, Mapping):
        amplitudes = dict(zip(rd.weyl_labels, amplitudes, strict=True))
    unknown = set(amplitudes) - set(rd.weyl_labels)
    if unknown:
        raise ValueError(f"Unknown Weyl labels {sorted(unknown)}")
    series = [_wall_series(model, lam, j, N) for j in range(1, rd.rank + 1)]
    terms = []
    for w, label in enumerate(rd.weyl_labels):
        amplitude = complex(amplitudes.get(label, 0.0))
        if amplitude == 0:
            continue
        factors = tuple(series[j - 1][_coset_index(rd, w, j)] for j in range(1, rd.rank + 1))
        terms.append(ExpansionTerm(label, amplitude, factors))
    return AsymptoticExpansion(model.model_id, terms)


def fit_expansion(
    model: SpaceModel, lam, u: Eigenfunction, b: BoundaryPoint, cfg: ExtractionConfig | None = None
) -> AsymptoticExpansion:
    """Fit the branch amplitudes of a radial eigenfunction against its Frobenius series.

    Only valid when u is K-invariant in every factor (e.g. the spherical function),
    so that each radial profile is annihilated by the wall operators.

    Raises:
        IllConditionedFitError: If a wall's design matrix exceeds cond_max
    """
    cfg = cfg or ExtractionConfig()
    rd = model.root_datum
    lam = _prepare(model, lam)
    sigma = rd.rho - lam.values
    series = [_wall_series(model, lam, j, cfg.series_truncation) for j in range(1, rd.rank + 1)]
    pinvs, scales, grids = [], [], []
    for j, wall in enumerate(series, start=1):
        grid = cfg.grid(j)
        design = np.stack(
            [s.evaluate(grid) * np.exp(-sigma[j - 1] * np.log(grid)) for s in wall], axis=1
        )
        scale = np.max(np.abs(design), axis=0)
        condition = float(np.linalg.cond(design / scale))
        if condition > cfg.cond_max:
            raise IllConditionedFitError(
                f"Expansion fit on wall {j} has condition number {condition:.3e}", condition
            )
        pinvs.append(np.linalg.pinv(design / scale))
        scales.append(scale)
        grids.append(grid)
    amplitudes = _apply_per_axis(pinvs, _sample(u, b, grids, sigma))
    for axis, scale in enumerate(scales):
        shape = [1] * len(scales)
        shape[axis] = -1
        amplitudes = amplitudes / scale.reshape(shape)
    terms = []
    for w, label in enumerate(rd.weyl_labels):
        idx = tuple(_coset_index(rd, w, j) for j in range(1, rd.rank + 1))
        factors = tuple(series[j][r] for j, r in enumerate(idx))
        terms.append(ExpansionTerm(label, complex(amplitudes[idx]), factors))
    return AsymptoticExpansion(model.model_id, terms)


def series_delta_extraction(
    model: SpaceModel, lam, expansion: AsymptoticExpansion, tol: float = ANNIHILATION_TOL
) -> DeltaExtraction:
    """Apply t_j^{-1} P_j^sigma wall by wall to the zero extension of t^{-sigma} u.

    Each wall either annihilates a term or, when its exponent on that wall is
    exactly sigma_j, leaves q_j(0) times its leading coefficient on delta(t_j),
    with q_j(s) s = p_j(s + sigma_j). The final delta coefficient is
    prod_j q_j(0) a_e = p(lambda) a_e.

    Raises:
        GenericityError: If lambda fails the genericity conditions
        AnnihilationError: If the expansion is not annihilated by the wall operators
        ConsistencyError: If the delta coefficient differs from p(lambda) a_e
    """
    rd = model.root_datum
    if expansion.model_id != model.model_id:
        raise ValueError("Expansion belongs to a different model")
    if expansion.truncation < 1:
        raise ValueError("Expansion truncation must be at least 1")
    lam = _prepare(model, lam)
    sigma = rd.rho - lam.values
    p_value = genericity_value(rd, lam)

    current = [(complex(term.amplitude), term.factors) for term in expansion.terms]
    worst = 0.0
    for j in range(1, rd.rank + 1):
        P = geometry.radial_operator(model, lam, j)
        D = divide_by_t(shift_conjugate(P, sigma[j - 1]))
        scale_op = float(np.max(np.abs(P.coeffs)))
        survivors = []
        for amplitude, factors in current:
            series = factors[j - 1]
            v = FormalSeries(series.coeffs, series.exponent_offset - sigma[j - 1])
            delta, regular = apply_divided_to_extension(D, v)
            k = np.arange(v.truncation + 1)
            scale = max(1.0, float(np.max(np.abs(v.coeffs) * (1 + abs(v.exponent_offset) + k) ** 2)))
            residual = float(np.max(np.abs(regular.coeffs))) / (scale * scale_op)
            worst = max(worst, residual)
            if delta != 0:
                survivors.append((amplitude * delta, factors))
        current = survivors
    if worst > tol:
        raise AnnihilationError(f"Wall operators leave a residual {worst:.3e} > {tol:.1e}")

    delta_coefficient = sum((a for a, _ in current), 0j)
    leading = 0j
    for term in expansion.terms:
        if np.allclose(term.exponents, sigma, rtol=0, atol=1e-12):
            leading += term.amplitude * np.prod([s.coeffs[0] for s in term.factors])
    expected = p_value * leading
    if abs(delta_coefficient - expected) > CONSISTENCY_TOL * max(1.0, abs(delta_coefficient)):
        raise ConsistencyError(
            f"Delta coefficient {delta_coefficient} differs from p(lambda) a_e = {expected}"
        )
    return DeltaExtraction(
        bv=delta_coefficient / p_value,
        delta_coefficient=delta_coefficient,
        p_value=p_value,
        leading_coefficient=complex(leading),
        annihilation_residual=worst,
    )


# -- c-function and verification harnesses ------------------------------------


def c_function_via_bv(model: SpaceModel, lam, cfg: ExtractionConfig | None = None) -> complex:
    """c(lambda) as the leading coefficient of the spherical function."""
    evaluator = transforms.PoissonEvaluator(model, lam, BoundaryFunction.constant(model.model_id))
    return leading_coefficient(model, lam, evaluator.at_corner, base_point(model), cfg)


def _select_c(model: SpaceModel, lam: SpectralParameter, cfg: ExtractionConfig):
    if float(np.min(lam.values.real)) > INTEGRAL_ROUTE_MARGIN:
        c = transforms.c_function_integral(model, lam)
        alternative = c_function_via_bv(model, lam, cfg)
        gap = abs(c - alternative)
        if gap > ROUTE_WARN_TOL * max(1.0, abs(c)):
            logger.warning(f"c-function routes disagree by {gap:.3e} (integral {c}, bv {alternative})")
        logger.info(f"Using integral route for c(lambda) = {c}")
        return c, "integral", alternative
    c = c_function_via_bv(model, lam, cfg)
    logger.info(f"Using boundary-value route for c(lambda) = {c}")
    return c, "bv", None


def verify_inversion(
    model: SpaceModel,
    lam,
    f: BoundaryFunction,
    cfg: ExtractionConfig | None = None,
    grid: int | None = None,
    threads: int | None = None,
) -> InversionReport:
    """Compare bv_{rho - lambda}(P_lambda f) with c(lambda) f on a boundary grid.

    The radial grid starts at t0 / (2K) for band limit K >= 1: the t^n corrections
    of a mode k grow like (2kt)^n and must stay small on the grid.
    """
    cfg = cfg or ExtractionConfig()
    lam = _prepare(model, lam)
    K = f.band_limit
    if K >= 1:
        cfg = cfg.with_scaled_start(1 / (2 * K))
    c, route, alternative = _select_c(model, lam, cfg)

    u = transforms.PoissonEvaluator(model, lam, f).at_corner
    n = grid or max(8, 2 * K + 2)
    points = boundary_points(model, n)
    results = _extract_many(model, lam, u, points, cfg, threads)
    report_points = [
        InversionPoint(b=b, bv=r.value, target=c * f(b)) for b, r in zip(points, results, strict=True)
    ]
    sup_f = max(abs(f(b)) for b in points) or 1.0
    residual = max(p.error for p in report_points) / sup_f
    logger.info(f"Inversion residual {residual:.3e} over {len(points)} boundary points")
    return InversionReport(
        residual_sup=residual,
        c_used=c,
        c_route=route,
        points=report_points,
        c_alternative=alternative,
    )


def fatou_rate(
    model: SpaceModel,
    lam,
    f: BoundaryFunction,
    b: BoundaryPoint,
    cfg: ExtractionConfig | None = None,
) -> FatouResult:
    """Empirical exponent of |t^{-sigma} P_lambda f(b, t) - c(lambda) f(b)| along t_j = t."""
    cfg = cfg or ExtractionConfig()
    lam = _prepare(model, lam)
    rd = model.root_datum
    sigma = rd.rho - lam.values
    target = transforms.c_function_integral(model, lam) * f(b)
    evaluator = transforms.PoissonEvaluator(model, lam, f)
    ts = cfg.grid(1)
    errors = []
    for t in ts:
        tv = np.full(rd.rank, t)
        value = evaluator.at_corner(b, tv) * np.exp(-np.sum(sigma * np.log(tv)))
        errors.append(abs(value - target))
    errors_arr = np.array(errors)
    usable = errors_arr > 0
    if np.count_nonzero(usable) < 2:
        rate = float("inf")
    else:
        rate = float(np.polyfit(np.log(ts[usable]), np.log(errors_arr[usable]), 1)[0])
    # the first correction of the identity term is t^2, so the rate saturates there
    expected = min(
        min(
            float(np.sum((lam.values - w @ lam.values).real))
            for idx, w in enumerate(rd.weyl_elements)
            if idx != 0
        ),
        FATOU_RATE_CAP,
    )
    logger.debug(f"Fatou rate {rate:.3f} (expected at least {expected:.3f})")
    return FatouResult(rate=rate, expected_rate=expected, t_values=ts.tolist(), errors=errors)


def verify_equivariance(
    model: SpaceModel,
    lam,
    f: BoundaryFunction,
    g: GroupElement,
    cfg: ExtractionConfig | None = None,
    grid: int | None = None,
) -> EquivarianceResult:
    """Compare bv(x -> P_lambda f(g^{-1} x))(b) with prod_j tau_j^{sigma_j} bv(P_lambda f)(b').

    Here (b', tau) = boundary_action(g, b), so the right side is pi_lambda(g) applied
    to the boundary value of P_lambda f.
    """
    cfg = cfg or ExtractionConfig()
    lam = _prepare(model, lam)
    sigma = model.root_datum.rho - lam.values
    evaluator = transforms.PoissonEvaluator(model, lam, f)
    g_inv = g.inverse()

    def translated(b: BoundaryPoint, t: np.ndarray) -> complex:
        x = geometry.from_corner(model, CornerCoordinates(b=b, t=t))
        return evaluator(geometry.group_action(model, g_inv, x))

    n = grid or (8 if model.rank == 1 else 4)
    points = []
    for b in boundary_points(model, n):
        lhs = leading_coefficient(model, lam, translated, b, cfg)
        moved, taus = geometry.boundary_action(model, g, b)
        weight = np.exp(np.sum(sigma * np.log(taus)))
        rhs = weight * leading_coefficient(model, lam, evaluator.at_corner, moved, cfg)
        points.append(InversionPoint(b=b, bv=lhs, target=complex(rhs)))
    scale = max(abs(p.target) for p in points) or 1.0
    max_error = max(p.error for p in points) / scale
    logger.info(f"Equivariance defect {max_error:.3e} over {len(points)} points")
    return EquivarianceResult(max_error=max_error, points=points)
