"""Iwasawa decomposition, horocycle bracket, corner coordinates and radial operators.

Every factor is handled through SL(2) acting on upper half-space {(z, h): h > 0}
by the Moebius extension, with origin o = (0, 1) and K = SO(2) or SU(2). A
boundary point b = kM is represented by the unit vector k e_1, whose projective
class k . infinity is the boundary point in half-space coordinates.
"""

import logging
import os

import numpy as np
from scipy.linalg import expm

from poisson_bv.engines.rootdata import build_root_datum
from poisson_bv.models.operator import ThetaOperator
from poisson_bv.models.roots import ModelId, SpectralParameter
from poisson_bv.models.space import (
    BoundaryPoint,
    CornerCoordinates,
    GroupElement,
    IwasawaDecomposition,
    SpaceModel,
    SpacePoint,
)
from poisson_bv.utils.errors import ModelDomainError, UnsupportedModelError

logger = logging.getLogger(__name__)

H3_FLAG_ENV = "POISSON_BV_ENABLE_H3"
CHART_TOL = 1e-14


def h3_enabled(flag: bool | None = None) -> bool:
    """Resolve the h3 feature flag; an explicit argument wins over the environment."""
    if flag is not None:
        return flag
    return os.getenv(H3_FLAG_ENV, "").strip().lower() in ("1", "true", "yes", "on")


def build_space_model(model_id: str | ModelId, enable_h3: bool | None = None) -> SpaceModel:
    """Build a space model.

    Raises:
        UnsupportedModelError: If the id is unknown or h3 is requested while disabled
    """
    rd = build_root_datum(model_id)
    if rd.model_id == ModelId.H3 and not h3_enabled(enable_h3):
        raise UnsupportedModelError(f"Model h3 is disabled; set {H3_FLAG_ENV}=1 to enable it")
    return SpaceModel(model_id=rd.model_id, root_datum=rd, metric_normalization=1.0)


# -- per-factor helpers -------------------------------------------------------


def factor_coords(model: SpaceModel, x: SpacePoint) -> list[tuple[complex, float]]:
    """Half-space coordinates (z, h) of every factor of x."""
    if x.model_id != model.model_id:
        raise ValueError("Point belongs to a different model")
    if model.model_id == ModelId.H3:
        return [(complex(x.coords[0], x.coords[1]), float(x.coords[2]))]
    coords = []
    for w in x.coords:
        z = 1j * (1 + w) / (1 - w)
        coords.append((complex(z.real), float(z.imag)))
    return coords


def _assemble_point(model: SpaceModel, coords: list[tuple[complex, float]]) -> SpacePoint:
    if model.model_id == ModelId.H3:
        z, h = coords[0]
        return SpacePoint(model.model_id, np.array([z.real, z.imag, h]))
    disk = []
    for z, h in coords:
        zz = z.real + 1j * h
        disk.append((zz - 1j) / (zz + 1j))
    return SpacePoint(model.model_id, np.array(disk, dtype=complex))


def mobius(g: np.ndarray, z, h):
    """Action of a 2 x 2 matrix on half-space points (vectorized over z, h)."""
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    czd = c * z + d
    denom = np.abs(czd) ** 2 + np.abs(c) ** 2 * h**2
    z_new = ((a * z + b) * np.conj(czd) + a * np.conj(c) * h**2) / denom
    return z_new, h / denom


def section_vectors(kind: str, angles: np.ndarray) -> np.ndarray:
    """Unit vectors k_b e_1 for boundary angles; shape (..., 2).

    For a real factor, angles has shape (...) and theta maps to
    (cos(theta/2), -sin(theta/2)). For the complex factor, angles has shape
    (..., 2) holding (polar, azimuth).
    """
    angles = np.asarray(angles, dtype=float)
    if kind == "real":
        return np.stack([np.cos(angles / 2), -np.sin(angles / 2)], axis=-1).astype(complex)
    polar, azimuth = angles[..., 0], angles[..., 1]
    return np.stack(
        [np.cos(polar / 2) * np.exp(1j * azimuth), np.sin(polar / 2) + 0j], axis=-1
    )


def angles_from_vectors(kind: str, vectors: np.ndarray) -> np.ndarray:
    """Inverse of section_vectors on projective classes."""
    a, c = vectors[..., 0], vectors[..., 1]
    if kind == "real":
        return np.mod(-2 * np.arctan2(np.real(c), np.real(a)), 2 * np.pi)
    polar = 2 * np.arctan2(np.abs(c), np.abs(a))
    azimuth = np.mod(np.angle(a * np.conj(c)), 2 * np.pi)
    return np.stack([polar, azimuth], axis=-1)


def section_matrix(kind: str, angles) -> np.ndarray:
    """An element k_b of K with k_b . infinity = b."""
    a, c = section_vectors(kind, np.asarray(angles))
    if kind == "real":
        return np.array([[a.real, -c.real], [c.real, a.real]])
    return np.array([[a, -np.conj(c)], [c, np.conj(a)]])


def _factor_angles(model: SpaceModel, b: BoundaryPoint) -> list:
    if b.model_id != model.model_id:
        raise ValueError("Boundary point belongs to a different model")
    if model.model_id == ModelId.H3:
        return [np.asarray(b.angles)]
    return [float(a) for a in b.angles]


def bracket_factor(kind: str, z: complex, h: float, angles) -> np.ndarray:
    """A(x, b) for one factor, vectorized over boundary angles.

    With g_x = [[sqrt h, z / sqrt h], [0, 1 / sqrt h]] and e = k_b e_1,
    A = -H(g_x^{-1} k_b) = -2 log |g_x^{-1} e|.
    """
    e = section_vectors(kind, angles)
    a, c = e[..., 0], e[..., 1]
    return -np.log(np.abs(a - z * c) ** 2 / h + h * np.abs(c) ** 2)


def iwasawa_height(matrices: np.ndarray) -> np.ndarray:
    """H(g) = 2 log |g e_1| for a stack of 2 x 2 matrices."""
    return 2 * np.log(np.linalg.norm(np.asarray(matrices)[..., :, 0], axis=-1))


# -- operations ---------------------------------------------------------------


def origin(model: SpaceModel) -> SpacePoint:
    return SpacePoint.origin(model.model_id)


def iwasawa(model: SpaceModel, g: GroupElement) -> IwasawaDecomposition:
    """Decompose g = k exp(H) n via QR with positive diagonal in R."""
    ks, hs, ns = [], [], []
    for m in g.factors:
        q, r = np.linalg.qr(m)
        phases = np.diag(r) / np.abs(np.diag(r))
        k = q @ np.diag(phases)
        r = np.diag(np.conj(phases)) @ r
        diag = np.real(np.diag(r))
        if np.isrealobj(m):
            k, r = np.real(k), np.real(r)
        ks.append(k)
        hs.append(2 * np.log(diag[0]))
        ns.append(np.diag(1 / diag) @ r)
    return IwasawaDecomposition(
        k=GroupElement(g.model_id, tuple(ks)),
        H=np.array(hs),
        n=GroupElement(g.model_id, tuple(ns)),
    )


def horocycle_bracket(model: SpaceModel, x: SpacePoint, b: BoundaryPoint) -> np.ndarray:
    """A(x, b) in H_j coordinates; A(o, b) = 0."""
    values = []
    for kind, (z, h), angles in zip(
        model.factors, factor_coords(model, x), _factor_angles(model, b), strict=True
    ):
        values.append(float(bracket_factor(kind, z, h, angles)))
    return np.array(values)


def hyperbolic_distance(model: SpaceModel, x: SpacePoint) -> np.ndarray:
    """Per-factor distance to the origin."""
    out = []
    for z, h in factor_coords(model, x):
        out.append(float(np.arccosh(1 + (abs(z) ** 2 + (h - 1) ** 2) / (2 * h))))
    return np.array(out)


def corner_coords(model: SpaceModel, x: SpacePoint) -> CornerCoordinates:
    """Corner coordinates (b, t) of x, with t_j = exp(-d_j).

    Raises:
        ModelDomainError: If some factor of x is the origin (outside the open chart)
    """
    angles: list = []
    ts = []
    for kind, (z, h) in zip(model.factors, factor_coords(model, x), strict=True):
        g = np.array([[np.sqrt(h), z / np.sqrt(h)], [0.0, 1 / np.sqrt(h)]])
        if kind == "real":
            g = np.real(g)
        u, s, _ = np.linalg.svd(g)
        t = s[1] / s[0]
        if 1 - t < CHART_TOL:
            raise ModelDomainError("Point is not in the open corner chart")
        ts.append(t)
        direction = angles_from_vectors(kind, u[:, 0])
        if kind == "real":
            angles.append(float(direction))
        else:
            angles.extend(float(a) for a in direction)
    return CornerCoordinates(b=BoundaryPoint(model.model_id, np.array(angles)), t=np.array(ts))


def from_corner(model: SpaceModel, c: CornerCoordinates) -> SpacePoint:
    """Inverse of corner_coords.

    Raises:
        ModelDomainError: If some t_j = 0 (the point would lie on the boundary)
    """
    if np.any(c.t <= 0):
        raise ModelDomainError("t_j = 0 lies outside the model")
    coords = []
    for kind, angles, t in zip(model.factors, _factor_angles(model, c.b), c.t, strict=True):
        k = section_matrix(kind, angles)
        z, h = mobius(k, 0j, 1 / t)
        coords.append((complex(z), float(h)))
    return _assemble_point(model, coords)


def radial_operator(model: SpaceModel, lam, j: int) -> ThetaOperator:
    """Radial part of Delta - (lambda_j^2 - rho_j^2) in t_j = exp(-r_j), times (1 - t^2).

    The result is (1 - t^2) theta^2 - m (1 + t^2) theta - c^2 (1 - t^2)(lambda^2 - rho^2)
    with m the root multiplicity and c the metric normalization; its indicial
    roots are rho -+ lambda exactly when c = 1.
    """
    rd = model.root_datum
    lam = SpectralParameter.coerce(lam, rd.rank)
    if not 1 <= j <= rd.rank:
        raise ValueError(f"Wall index {j} outside 1..{rd.rank}")
    m_alpha, m_2alpha = rd.multiplicities[j - 1]
    m = m_alpha + 2 * m_2alpha
    rho = rd.rho[j - 1]
    c2 = model.metric_normalization**2
    eigen = c2 * (lam[j - 1] ** 2 - rho**2)
    return ThetaOperator(
        np.array(
            [
                [-eigen, -m, 1.0],
                [0.0, 0.0, 0.0],
                [eigen, -m, -1.0],
            ],
            dtype=complex,
        )
    )


def group_action(model: SpaceModel, g: GroupElement, x: SpacePoint) -> SpacePoint:
    """g . x by Moebius transformations factorwise."""
    coords = []
    for m, (z, h) in zip(g.factors, factor_coords(model, x), strict=True):
        z_new, h_new = mobius(m, z, h)
        coords.append((complex(z_new), float(h_new)))
    return _assemble_point(model, coords)


def boundary_action(
    model: SpaceModel, g: GroupElement, b: BoundaryPoint
) -> tuple[BoundaryPoint, np.ndarray]:
    """Return kappa(g^{-1} k_b)M and the factors tau_j = exp(A_j(g . o, b)).

    These are exactly the two ingredients of the principal series action:
    (pi_lambda(g) f)(b) = prod_j tau_j^{(rho - lambda)_j} f(kappa(g^{-1} k_b)M).
    """
    g_inv = g.inverse()
    g_o = group_action(model, g, origin(model))
    angles: list = []
    taus = []
    for kind, m, ang, (z, h) in zip(
        model.factors, g_inv.factors, _factor_angles(model, b), factor_coords(model, g_o),
        strict=True,
    ):
        moved = angles_from_vectors(kind, m @ section_vectors(kind, ang))
        if kind == "real":
            angles.append(float(moved))
        else:
            angles.extend(float(a) for a in moved)
        taus.append(float(np.exp(bracket_factor(kind, z, h, ang))))
    return BoundaryPoint(model.model_id, np.array(angles)), np.array(taus)


def random_group_element(
    model: SpaceModel, rng: np.random.Generator, scale: float = 0.3
) -> GroupElement:
    """exp of a random Lie algebra element of size ~scale in every factor."""
    mats = []
    for kind in model.factors:
        x = rng.normal(size=(2, 2))
        if kind == "complex":
            x = x + 1j * rng.normal(size=(2, 2))
        x = x - np.trace(x) / 2 * np.eye(2)
        g = expm(scale * x)
        g = g / np.sqrt(np.linalg.det(g))
        mats.append(np.real(g) if kind == "real" else g)
    return GroupElement(model.model_id, tuple(mats))
