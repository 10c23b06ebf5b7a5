"""Weyl orbits, characteristic exponents, wall indicial polynomials and genericity."""

import logging
from functools import lru_cache

import numpy as np

from poisson_bv.data.root_data import get_root_data_table
from poisson_bv.models.roots import (
    GenericityReport,
    GenericityViolation,
    ModelId,
    RootDatum,
    SpectralParameter,
    WeylOrbit,
)
from poisson_bv.models.series import MonicPolynomial
from poisson_bv.utils.errors import GenericityError, UnsupportedModelError

logger = logging.getLogger(__name__)

NEGATIVE_INTEGER_TOL = 1e-9
NEGATIVE_INTEGER_WARN = 1e-6


@lru_cache(maxsize=None)
def build_root_datum(model_id: str | ModelId) -> RootDatum:
    """Build the root datum of a supported model.

    Raises:
        UnsupportedModelError: If the model id is unknown
    """
    try:
        model = ModelId(model_id)
        table = get_root_data_table(model.value)
    except (ValueError, KeyError) as e:
        raise UnsupportedModelError(f"Unknown model id '{model_id}'") from e

    weyl = tuple(np.asarray(w, dtype=int) for w in table["weyl_elements"])
    ell = len(table["simple_roots"])
    stabilizers = tuple(
        tuple(idx for idx, w in enumerate(weyl) if np.array_equal(w[j], np.eye(ell, dtype=int)[j]))
        for j in range(ell)
    )
    return RootDatum(
        model_id=model,
        simple_roots=tuple(table["simple_roots"]),
        multiplicities=tuple(tuple(m) for m in table["multiplicities"]),
        rho=np.asarray(table["rho"], dtype=complex),
        weyl_elements=weyl,
        weyl_labels=tuple(table["weyl_labels"]),
        wall_stabilizers=stabilizers,
    )


def _check_wall(rd: RootDatum, j: int) -> None:
    if not 1 <= j <= rd.rank:
        raise ValueError(f"Wall index {j} outside 1..{rd.rank}")


def weyl_orbit(rd: RootDatum, lam) -> WeylOrbit:
    """Return w . lambda for every Weyl element, in stored order.

    Repetitions are kept; ``free`` is False when two elements give the same point.
    """
    lam = SpectralParameter.coerce(lam, rd.rank)
    points = [w @ lam.values for w in rd.weyl_elements]
    free = all(
        not np.allclose(points[a], points[b], rtol=0, atol=1e-12)
        for a in range(len(points))
        for b in range(a + 1, len(points))
    )
    return WeylOrbit(points=points, labels=list(rd.weyl_labels), free=free)


def characteristic_exponents(rd: RootDatum, lam) -> list[np.ndarray]:
    """Return rho - w . lambda for every Weyl element."""
    orbit = weyl_orbit(rd, lam)
    return [rd.rho - point for point in orbit.points]


def coset_representatives(rd: RootDatum, j: int) -> list[int]:
    """Indices of representatives of W / W_j, picked by first occurrence.

    Two elements lie in the same coset exactly when they move H_j to the same
    vector, which is row j of the matrix acting on lambda coordinates.
    """
    _check_wall(rd, j)
    seen: list[np.ndarray] = []
    reps: list[int] = []
    for idx, w in enumerate(rd.weyl_elements):
        row = w[j - 1]
        if not any(np.array_equal(row, other) for other in seen):
            seen.append(row)
            reps.append(idx)
    return reps


def exponent_gaps(rd: RootDatum, lam, j: int) -> np.ndarray:
    """(w . lambda)(H_j) - lambda(H_j) over the coset representatives of wall j.

    These are the differences sigma_j - (rho - w . lambda)(H_j) with rho cancelled
    symbolically, so the identity coset contributes an exact zero.
    """
    lam = SpectralParameter.coerce(lam, rd.rank)
    return np.array(
        [(rd.weyl_elements[r] @ lam.values)[j - 1] - lam.values[j - 1]
         for r in coset_representatives(rd, j)],
        dtype=complex,
    )


def wall_exponents(rd: RootDatum, lam, j: int) -> np.ndarray:
    """Roots of p_{j, lambda}: (rho - w . lambda)(H_j) over coset representatives."""
    lam = SpectralParameter.coerce(lam, rd.rank)
    return np.array(
        [rd.rho[j - 1] - (rd.weyl_elements[r] @ lam.values)[j - 1]
         for r in coset_representatives(rd, j)],
        dtype=complex,
    )


def wall_indicial_polynomial(rd: RootDatum, lam, j: int) -> MonicPolynomial:
    """Return p_{j, lambda}(s) = prod over W / W_j of (s - (rho - w . lambda)(H_j))."""
    _check_wall(rd, j)
    return MonicPolynomial.from_roots(wall_exponents(rd, lam, j))


def wall_derivative_at_sigma(rd: RootDatum, lam, j: int) -> complex:
    """p'_{j, lambda}(sigma_j) by the product rule on the factored form."""
    gaps = exponent_gaps(rd, lam, j)
    total = 0j
    for r in range(len(gaps)):
        total += complex(np.prod(np.delete(gaps, r)))
    return total


def genericity_value(rd: RootDatum, lam) -> complex:
    """Return p(lambda) = prod_j p'_{j, lambda}(sigma_j) with sigma = rho - lambda."""
    value = 1 + 0j
    for j in range(1, rd.rank + 1):
        value *= wall_derivative_at_sigma(rd, lam, j)
    return value


def genericity_factors_nonzero(rd: RootDatum, lam) -> bool:
    """Whether p(lambda) != 0, read off the factored form.

    p(lambda) is a product of exponent gaps, so it vanishes exactly when one of
    the non-identity gaps does. The floating product can underflow for tiny
    lambda; the factors cannot.
    """
    lam = SpectralParameter.coerce(lam, rd.rank)
    return all(bool(np.all(exponent_gaps(rd, lam, j)[1:] != 0)) for j in range(1, rd.rank + 1))


def _distance_to_negative_integer(value: complex) -> float:
    nearest = min(-1.0, float(np.round(value.real)))
    return max(abs(value.real - nearest), abs(value.imag))


def genericity_check(rd: RootDatum, lam) -> GenericityReport:
    """Test the genericity conditions on lambda.

    cond_i requires lambda(H_j - w . H_j) != 0 for w outside W_j; cond_ii requires
    the same values to avoid the negative integers (within 1e-9, warning within 1e-6).
    """
    lam = SpectralParameter.coerce(lam, rd.rank)
    violations: list[GenericityViolation] = []
    near: list[GenericityViolation] = []
    cond_i = True
    cond_ii = True
    for j in range(1, rd.rank + 1):
        stabilizer = set(rd.wall_stabilizers[j - 1])
        for idx, w in enumerate(rd.weyl_elements):
            if idx in stabilizer:
                continue
            value = complex(lam.values[j - 1] - (w @ lam.values)[j - 1])
            label = rd.weyl_labels[idx]
            if value == 0:
                cond_i = False
                violations.append(GenericityViolation("cond_i", j, label, value))
                continue
            distance = _distance_to_negative_integer(value)
            if distance <= NEGATIVE_INTEGER_TOL:
                cond_ii = False
                violations.append(GenericityViolation("cond_ii", j, label, value))
            elif distance <= NEGATIVE_INTEGER_WARN:
                logger.warning(
                    f"lambda(H_{j} - w.H_{j}) = {value} is within {distance:.2e} "
                    f"of a negative integer (w={label})"
                )
                near.append(GenericityViolation("cond_ii", j, label, value))
    p_value = genericity_value(rd, lam)
    return GenericityReport(
        cond_i=cond_i,
        cond_ii=cond_ii,
        p_nonzero=genericity_factors_nonzero(rd, lam),
        p_value=p_value,
        violations=violations,
        near_violations=near,
    )


def require_generic(rd: RootDatum, lam) -> GenericityReport:
    """Run genericity_check and refuse parameters that fail it.

    Raises:
        GenericityError: Naming every violated (condition, j, w)
    """
    report = genericity_check(rd, lam)
    if not report.passed:
        names = ", ".join(f"{v.condition}(j={v.wall}, w={v.weyl_label})" for v in report.violations)
        if not names:
            names = "p(lambda) = 0"
        raise GenericityError(
            f"Spectral parameter is not generic: {names}",
            [v.to_dict() for v in report.violations],
        )
    return report
