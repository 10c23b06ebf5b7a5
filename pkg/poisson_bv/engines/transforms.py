"""Poisson transform, spherical functions, principal series action and the c-function."""

import logging
import threading

import numpy as np
from scipy.special import gamma

from poisson_bv.engines import geometry
from poisson_bv.models.boundary import BoundaryFunction
from poisson_bv.models.roots import ModelId, SpectralParameter
from poisson_bv.models.space import (
    BoundaryPoint,
    CornerCoordinates,
    GroupElement,
    SpaceModel,
    SpacePoint,
)
from poisson_bv.utils.errors import ChamberError, UnsupportedModelError
from poisson_bv.utils.quadrature import adaptive_gauss_legendre, circle_nodes, refine_periodic

logger = logging.getLogger(__name__)

CIRCLE_TOL = 1e-12
NBAR_TOL = 1e-14
MAX_CIRCLE_NODES = 1 << 16
# Beyond this log-depth the N-bar integrand is a pure power to double precision.
NBAR_CUTOFF = 20.0


def _rho_plus_lambda(model: SpaceModel, lam) -> np.ndarray:
    lam = SpectralParameter.coerce(lam, model.rank)
    return model.root_datum.rho + lam.values


def poisson_kernel(model: SpaceModel, lam, x: SpacePoint, b: BoundaryPoint) -> complex:
    """e^{(rho + lambda)(A(x, b))}; the bracket is real so exp of a real log suffices."""
    exponent = _rho_plus_lambda(model, lam)
    bracket = geometry.horocycle_bracket(model, x, b)
    return complex(np.exp(np.sum(exponent * bracket)))


class PoissonEvaluator:
    """Evaluates P_lambda f through cached Fourier mode profiles.

    On a circle factor, P_lambda(e^{ik.})(theta, t) = e^{ik theta} Phi_k(t) where
    Phi_k(t) is the k-th Fourier coefficient of the kernel at the point (0, t).
    Profiles are computed by an FFT on a trapezoid grid refined until the modes
    up to the band limit settle, and cached per (factor, t). On h3 only constant
    data is accepted and the sphere integral runs in cos(polar) about the point's axis.
    """

    def __init__(
        self,
        model: SpaceModel,
        lam,
        f: BoundaryFunction,
        tol: float = CIRCLE_TOL,
        max_nodes: int = MAX_CIRCLE_NODES,
    ):
        if f.model_id != model.model_id:
            raise ValueError("Boundary function belongs to a different model")
        self.model = model
        self.lam = SpectralParameter.coerce(lam, model.rank)
        self.f = f
        self.tol = tol
        self.max_nodes = max_nodes
        self.coeffs = f.fourier_coefficients()
        self.band_limit = (self.coeffs.shape[0] - 1) // 2
        self.exponents = _rho_plus_lambda(model, self.lam)
        self._cache: dict[tuple[int, float], np.ndarray] = {}
        self._cache_lock = threading.Lock()

    def profile(self, j: int, t: float) -> np.ndarray:
        """Mode integrals Phi_k(t), -K <= k <= K, for circle factor j (0-based)."""
        key = (j, float(t))
        with self._cache_lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached

        K = self.band_limit
        if t >= 1.0:
            values = np.zeros(2 * K + 1, dtype=complex)
            values[K] = 1.0
        else:
            exponent = self.exponents[j]

            def integrate(count: int) -> np.ndarray:
                theta = circle_nodes(count)
                kernel = np.exp(exponent * geometry.bracket_factor("real", 0j, 1 / t, theta))
                modes = np.fft.ifft(kernel)
                return np.concatenate([modes[count - K:], modes[: K + 1]]) if K else modes[:1]

            values, _ = refine_periodic(integrate, self.tol, max_nodes=self.max_nodes)
        with self._cache_lock:
            self._cache[key] = values
        return values

    def _sphere_constant(self, x: SpacePoint) -> complex:
        d = float(geometry.hyperbolic_distance(self.model, x)[0])
        if d == 0:
            return complex(self.coeffs[0])
        height = np.exp(d)
        exponent = self.exponents[0]

        def integrand(u):
            polar = np.arccos(np.clip(u, -1.0, 1.0))
            angles = np.stack([polar, np.zeros_like(polar)], axis=-1)
            return 0.5 * np.exp(exponent * geometry.bracket_factor("complex", 0j, height, angles))

        value, _ = adaptive_gauss_legendre(integrand, -1.0, 1.0, tol=self.tol, rtol=self.tol)
        return complex(self.coeffs[0]) * value

    def __call__(self, x: SpacePoint) -> complex:
        if x.model_id != self.model.model_id:
            raise ValueError("Point belongs to a different model")
        if self.model.model_id == ModelId.H3:
            return self._sphere_constant(x)
        K = self.band_limit
        modes = np.arange(-K, K + 1)
        acc = self.coeffs
        for j, w in enumerate(x.coords):
            r = abs(w)
            angle = float(np.angle(w)) if r > 0 else 0.0
            weights = np.exp(1j * modes * angle) * self.profile(j, (1 - r) / (1 + r))
            acc = weights @ acc
        return complex(acc)

    def at_corner(self, b: BoundaryPoint, t) -> complex:
        """P_lambda f at the corner coordinates (b, t)."""
        return self(geometry.from_corner(self.model, CornerCoordinates(b=b, t=t)))


def poisson_transform(
    model: SpaceModel, lam, f: BoundaryFunction, x: SpacePoint, tol: float = CIRCLE_TOL
) -> complex:
    """(P_lambda f)(x) with the normalized boundary measure.

    Raises:
        QuadratureError: If the quadrature refinement does not settle
    """
    return PoissonEvaluator(model, lam, f, tol=tol)(x)


def spherical_function(model: SpaceModel, lam, x: SpacePoint, tol: float = CIRCLE_TOL) -> complex:
    """phi_lambda(x) = P_lambda 1 (x)."""
    return poisson_transform(model, lam, BoundaryFunction.constant(model.model_id), x, tol=tol)


def require_chamber(lam: SpectralParameter) -> None:
    """Raises ChamberError unless every Re(lambda_j) > 0."""
    if np.any(lam.values.real <= 0):
        raise ChamberError(f"Re(lambda) = {lam.values.real} is not in the open positive chamber")


def _nbar_integral(kind: str, lam: complex, tol: float) -> complex:
    """int over one N-bar factor of e^{-(lambda + rho)(H(nbar))}, up to a lambda-free constant.

    With x = tan(u) and w = pi/2 - u the integral becomes
    int_0^{pi/2} sin(w)^{2 lambda - 1} g(w) dw, g = 1 on a real factor and cos(w)
    on the complex one. Writing w = (pi/2) e^{-v} turns the endpoint power into
    the decay e^{-2 lambda v}; past NBAR_CUTOFF the tail is integrated exactly.
    """
    scale = np.exp(2 * lam * np.log(np.pi / 2))

    def integrand(v):
        v = np.asarray(v, dtype=float)
        w = (np.pi / 2) * np.exp(-v)
        value = scale * np.exp(-2 * lam * v + (2 * lam - 1) * np.log(np.sinc(w / np.pi)))
        if kind == "complex":
            value = value * np.cos(w)
        return value

    body, error = adaptive_gauss_legendre(integrand, 0.0, NBAR_CUTOFF, tol=tol, rtol=tol)
    tail = scale * np.exp(-2 * lam * NBAR_CUTOFF) / (2 * lam)
    logger.debug(f"N-bar integral at lambda={lam}: body {body}, tail {tail} (error {error:.2e})")
    return complex(body + tail)


def c_function_integral(model: SpaceModel, lam, tol: float = NBAR_TOL) -> complex:
    """Harish-Chandra c-function from its N-bar integral, normalized so c(rho) = 1.

    Raises:
        ChamberError: If some Re(lambda_j) <= 0
        QuadratureError: If the adaptive quadrature fails
    """
    lam = SpectralParameter.coerce(lam, model.rank)
    require_chamber(lam)
    value = 1 + 0j
    for kind, lj, rho in zip(model.factors, lam.values, model.root_datum.rho, strict=True):
        value *= _nbar_integral(kind, complex(lj), tol) / _nbar_integral(kind, complex(rho), tol)
    return value


def c_function_closed_form(model: SpaceModel, lam) -> complex:
    """Gamma(lambda) / (sqrt(pi) Gamma(lambda + 1/2)) per real factor, 1/lambda for h3."""
    lam = SpectralParameter.coerce(lam, model.rank)
    value = 1 + 0j
    for kind, lj in zip(model.factors, lam.values, strict=True):
        if kind == "real":
            value *= gamma(lj) / (np.sqrt(np.pi) * gamma(lj + 0.5))
        else:
            value *= 1 / lj
    return complex(value)


def circle_grid(model: SpaceModel, n: int) -> np.ndarray:
    """Uniform boundary grid of shape (n,)*factors + (factors,)."""
    theta = circle_nodes(n)
    mesh = np.meshgrid(*([theta] * len(model.factors)), indexing="ij")
    return np.stack(mesh, axis=-1)


def principal_series_action(
    model: SpaceModel, lam, g: GroupElement, f: BoundaryFunction, grid: int | None = None
) -> BoundaryFunction:
    """(pi_lambda(g) f)(kM) = e^{-(rho - lambda)(H(g^{-1} k))} f(kappa(g^{-1} k)M) on a sample grid.

    Raises:
        UnsupportedModelError: For h3, whose boundary data is limited to constants
    """
    if model.model_id == ModelId.H3:
        raise UnsupportedModelError("Principal series action on h3 needs non-constant data")
    lam = SpectralParameter.coerce(lam, model.rank)
    sigma = model.root_datum.rho - lam.values
    if grid is None:
        grid = f.samples.shape[0] if f.samples is not None else max(64, 4 * f.band_limit + 2)
    points = circle_grid(model, grid)
    g_inv = g.inverse()
    values = np.empty(points.shape[:-1], dtype=complex)
    for idx in np.ndindex(*points.shape[:-1]):
        heights = np.empty(len(model.factors))
        moved = np.empty(len(model.factors))
        for j, (kind, m, theta) in enumerate(zip(model.factors, g_inv.factors, points[idx], strict=True)):
            gk = m @ geometry.section_matrix(kind, theta)
            heights[j] = geometry.iwasawa_height(gk)
            moved[j] = geometry.angles_from_vectors(kind, gk[:, 0])
        values[idx] = np.exp(-np.sum(sigma * heights)) * f.evaluate(moved)
    return BoundaryFunction(model.model_id, samples=values)
