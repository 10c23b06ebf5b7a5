"""Polynomials, truncated power series and delta layers."""

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly

from poisson_bv.models.codec import complex_to_pair, decode_array, encode_array, pair_to_complex


def powers_of(s: complex, count: int) -> np.ndarray:
    """Return [1, s, s**2, ...] with count entries (0**0 taken as 1)."""
    powers = np.ones(count, dtype=complex)
    for i in range(1, count):
        powers[i] = powers[i - 1] * s
    return powers


def taylor_shift(coefficients: np.ndarray, shift: complex) -> np.ndarray:
    """Return the coefficients of c(s + shift) given those of c(s), lowest degree first."""
    coefficients = np.asarray(coefficients, dtype=complex)
    degree = len(coefficients) - 1
    shifted = np.zeros_like(coefficients)
    powers = powers_of(shift, degree + 1)
    for k, c_k in enumerate(coefficients):
        if c_k == 0:
            continue
        for j in range(k + 1):
            shifted[j] += c_k * comb(k, j) * powers[k - j]
    return shifted


@dataclass(frozen=True, eq=False)
class MonicPolynomial:
    """Monic polynomial in s with coefficients stored lowest degree first."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.atleast_1d(np.asarray(self.coefficients, dtype=complex)).copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        self.validate()

    def validate(self) -> None:
        """Validate monicity and finiteness.

        Raises:
            ValueError: If the polynomial is empty, non-finite or not monic
        """
        if self.coefficients.ndim != 1 or len(self.coefficients) == 0:
            raise ValueError("Polynomial needs at least one coefficient")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("Polynomial coefficients must be finite")
        if self.coefficients[-1] != 1:
            raise ValueError(
                f"Leading coefficient must be exactly 1, got {self.coefficients[-1]}"
            )

    @classmethod
    def from_roots(cls, roots) -> "MonicPolynomial":
        """Build prod_k (s - r_k)."""
        roots = np.asarray(roots, dtype=complex)
        if roots.size == 0:
            return cls(np.ones(1, dtype=complex))
        coeffs = np.asarray(npoly.polyfromroots(roots), dtype=complex)
        coeffs[-1] = 1.0
        return cls(coeffs)

    @classmethod
    def normalize(cls, coefficients) -> tuple["MonicPolynomial", complex]:
        """Divide by the leading coefficient.

        Returns:
            The monic polynomial and the factor that was divided out.

        Raises:
            ValueError: If the leading coefficient is zero
        """
        coeffs = np.asarray(coefficients, dtype=complex)
        lead = complex(coeffs[-1])
        if lead == 0:
            raise ValueError("Leading coefficient is zero")
        monic = coeffs / lead
        monic[-1] = 1.0
        return cls(monic), lead

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, s):
        return npoly.polyval(s, self.coefficients)

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        return np.asarray(npoly.polyroots(self.coefficients), dtype=complex)

    def derivative(self, s):
        """Evaluate p'(s)."""
        if self.degree == 0:
            return 0.0 * np.asarray(s)
        return npoly.polyval(s, npoly.polyder(self.coefficients))

    def shifted(self, shift: complex) -> "MonicPolynomial":
        """Return s -> p(s + shift)."""
        coeffs = taylor_shift(self.coefficients, shift)
        coeffs[-1] = 1.0
        return MonicPolynomial(coeffs)

    def allclose(self, other: "MonicPolynomial", tol: float = 1e-10) -> bool:
        if self.degree != other.degree:
            return False
        return bool(np.allclose(self.coefficients, other.coefficients, rtol=0, atol=tol))

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"coefficients": encode_array(self.coefficients)}

    @classmethod
    def from_dict(cls, data: dict) -> "MonicPolynomial":
        """Create from dictionary."""
        return cls(decode_array(data["coefficients"]))


@dataclass(frozen=True, eq=False)
class FormalSeries:
    """Truncated series t^offset * sum_k u_k t^k.

    Coefficients may be vector valued (shape (N+1, n)) for the matrix variants.
    """

    coeffs: np.ndarray
    exponent_offset: complex = 0.0

    def __post_init__(self) -> None:
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "exponent_offset", complex(self.exponent_offset))
        self.validate()

    def validate(self) -> None:
        """Validate series structure.

        Raises:
            ValueError: If the series is empty or holds non-finite values
        """
        if self.coeffs.shape[0] == 0:
            raise ValueError("Series needs at least one coefficient")
        if self.coeffs.ndim > 2:
            raise ValueError("Series coefficients must be scalars or vectors")
        if not np.isfinite(self.exponent_offset):
            raise ValueError("Exponent offset must be finite")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("Series coefficients must be finite")

    @classmethod
    def zeros(cls, truncation: int, offset: complex = 0.0) -> "FormalSeries":
        return cls(np.zeros(truncation + 1, dtype=complex), offset)

    @classmethod
    def monomial(cls, n: int, truncation: int | None = None) -> "FormalSeries":
        """The series t^n."""
        truncation = n if truncation is None else truncation
        coeffs = np.zeros(truncation + 1, dtype=complex)
        coeffs[n] = 1.0
        return cls(coeffs)

    @property
    def truncation(self) -> int:
        return self.coeffs.shape[0] - 1

    def padded(self, truncation: int) -> "FormalSeries":
        """Return the series truncated or zero-padded to the given order."""
        if truncation + 1 <= self.coeffs.shape[0]:
            return FormalSeries(self.coeffs[: truncation + 1], self.exponent_offset)
        pad = [(0, truncation + 1 - self.coeffs.shape[0])] + [(0, 0)] * (self.coeffs.ndim - 1)
        return FormalSeries(np.pad(self.coeffs, pad), self.exponent_offset)

    def evaluate(self, t):
        """Evaluate t^offset * sum u_k t^k for positive real t."""
        t = np.asarray(t, dtype=float)
        poly = npoly.polyval(t, self.coeffs)
        return np.exp(self.exponent_offset * np.log(t)) * poly

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "exponent_offset": complex_to_pair(self.exponent_offset),
            "coeffs": encode_array(self.coeffs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FormalSeries":
        """Create from dictionary."""
        return cls(
            decode_array(data["coeffs"]),
            pair_to_complex(data.get("exponent_offset", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class DeltaLayer:
    """Layer sum_k f_k * delta^(k)(t), coefficients f_0..f_m (scalars or vectors)."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.shape[0] == 0 or not np.all(np.isfinite(coeffs)):
            raise ValueError("Delta layer needs finite coefficients")

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"coeffs": encode_array(self.coeffs)}

    @classmethod
    def from_dict(cls, data: dict) -> "DeltaLayer":
        """Create from dictionary."""
        return cls(decode_array(data["coeffs"]))


@dataclass
class FixedPointSolution:
    """Result of the successive-approximation solver.

    ``increment_norms[n]`` is the weighted norm sum_k |w_{n,k}| r^k of the n-th
    increment on the certified disk of radius r, and ``bound_factor`` the
    geometric ratio the certificate guarantees for those norms.
    """

    series: FormalSeries
    certified_radius: float
    bound_factor: float
    increment_norms: list[float]
    iterations: int
    shift: int

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "series": self.series.to_dict(),
            "certified_radius": self.certified_radius,
            "bound_factor": self.bound_factor,
            "increment_norms": list(self.increment_norms),
            "iterations": self.iterations,
            "shift": self.shift,
        }
