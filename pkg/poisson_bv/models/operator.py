"""Fuchsian-form differential operators in theta = t d/dt."""

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from poisson_bv.models.codec import complex_to_pair, decode_array, encode_array, pair_to_complex
from poisson_bv.models.series import MonicPolynomial, powers_of


def _trim_columns(table: np.ndarray) -> np.ndarray:
    """Drop trailing all-zero theta columns, keeping at least one."""
    width = table.shape[1]
    while width > 1 and not np.any(table[:, width - 1]):
        width -= 1
    return table[:, :width]


@dataclass(frozen=True, eq=False)
class ThetaOperator:
    """Operator sum_{i,k} c[i, k] t^i theta^k.

    Row i is the polynomial slice c_i(theta) multiplying t^i, stored lowest
    theta-degree first. The operator is of Fuchsian form when the i = 0 slice
    has degree equal to the order.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.coeffs, dtype=complex)
        if table.ndim == 1:
            table = table[np.newaxis, :]
        table = _trim_columns(table).copy()
        table.setflags(write=False)
        object.__setattr__(self, "coeffs", table)
        self.validate()

    def validate(self) -> None:
        """Validate the coefficient table.

        Raises:
            ValueError: If the table is malformed or holds non-finite values
        """
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] == 0:
            raise ValueError("Operator coefficients must form a non-empty 2-D table")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("Operator coefficients must be finite")

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], complex]) -> "ThetaOperator":
        """Build from a mapping (t-power i, theta-power k) -> coefficient."""
        if not terms:
            raise ValueError("Operator needs at least one term")
        for i, k in terms:
            if i < 0 or k < 0:
                raise ValueError(f"Negative power in term {(i, k)}")
        rows = max(i for i, _ in terms) + 1
        cols = max(k for _, k in terms) + 1
        table = np.zeros((rows, cols), dtype=complex)
        for (i, k), value in terms.items():
            table[i, k] += complex(value)
        return cls(table)

    @classmethod
    def from_polynomial(cls, p: MonicPolynomial) -> "ThetaOperator":
        """The operator p(theta)."""
        return cls(np.asarray(p.coefficients)[np.newaxis, :])

    @property
    def order(self) -> int:
        """Highest theta power present in any slice."""
        return self.coeffs.shape[1] - 1

    @property
    def t_degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def is_fuchsian(self) -> bool:
        return bool(self.coeffs[0, -1] != 0)

    def slice(self, i: int) -> np.ndarray:
        """Coefficients of c_i(theta); zeros past the stored t-degree."""
        if i > self.t_degree:
            return np.zeros(self.order + 1, dtype=complex)
        return np.asarray(self.coeffs[i])

    def slice_values(self, i: int, s) -> np.ndarray:
        """Evaluate c_i at the points s."""
        return npoly.polyval(s, self.slice(i))

    def terms(self) -> dict[tuple[int, int], complex]:
        nonzero = np.argwhere(self.coeffs != 0)
        return {(int(i), int(k)): complex(self.coeffs[i, k]) for i, k in nonzero}

    def scaled(self, factor: complex) -> "ThetaOperator":
        return ThetaOperator(self.coeffs * factor)

    def allclose(self, other: "ThetaOperator", tol: float = 1e-12) -> bool:
        rows = max(self.coeffs.shape[0], other.coeffs.shape[0])
        cols = max(self.coeffs.shape[1], other.coeffs.shape[1])
        a = np.zeros((rows, cols), dtype=complex)
        b = np.zeros((rows, cols), dtype=complex)
        a[: self.coeffs.shape[0], : self.coeffs.shape[1]] = self.coeffs
        b[: other.coeffs.shape[0], : other.coeffs.shape[1]] = other.coeffs
        return bool(np.allclose(a, b, rtol=0, atol=tol))

    def to_dict(self) -> dict:
        """Convert to dictionary keyed by "i,k"."""
        return {
            "terms": {f"{i},{k}": complex_to_pair(v) for (i, k), v in sorted(self.terms().items())}
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThetaOperator":
        """Create from dictionary."""
        terms = {}
        for key, value in data["terms"].items():
            i, k = (int(part) for part in key.split(","))
            terms[(i, k)] = pair_to_complex(value)
        return cls.from_terms(terms)


@dataclass(frozen=True, eq=False)
class DividedThetaOperator:
    """The operator t^{-1} P written as d/dt q(theta) + R.

    Here p(s) = s q(s) is the t^0 slice of P and R = sum_{i>=1} t^{i-1} c_i(theta).
    Equivalently q(theta + 1) d/dt + R. The i = 0 slice of R may have lower
    degree than the order, so R is not required to be of Fuchsian form.
    """

    quotient: np.ndarray
    remainder: ThetaOperator

    def __post_init__(self) -> None:
        quotient = np.atleast_1d(np.asarray(self.quotient, dtype=complex)).copy()
        quotient.setflags(write=False)
        object.__setattr__(self, "quotient", quotient)

    def q(self, s):
        return npoly.polyval(s, self.quotient)


@dataclass(frozen=True, eq=False)
class MatrixThetaOperator:
    """n x n system p(theta) I_n + t Q.

    perturbation[i - 1, k] is the n x n matrix multiplying t^i theta^k.
    """

    indicial: MonicPolynomial
    perturbation: np.ndarray

    def __post_init__(self) -> None:
        pert = np.asarray(self.perturbation, dtype=complex).copy()
        pert.setflags(write=False)
        object.__setattr__(self, "perturbation", pert)
        self.validate()

    def validate(self) -> None:
        """Validate shapes.

        Raises:
            ValueError: If the perturbation array is malformed
        """
        pert = self.perturbation
        if pert.ndim != 4 or pert.shape[2] != pert.shape[3]:
            raise ValueError("Perturbation must have shape (I, K+1, n, n)")
        if pert.shape[1] - 1 > self.indicial.degree:
            raise ValueError("Perturbation theta-degree exceeds the indicial degree")
        if not np.all(np.isfinite(pert)):
            raise ValueError("Perturbation entries must be finite")

    @classmethod
    def from_terms(
        cls, indicial: MonicPolynomial, size: int, terms: Mapping[tuple[int, int], np.ndarray]
    ) -> "MatrixThetaOperator":
        """Build from a mapping (i >= 1, k) -> n x n matrix."""
        if any(i < 1 for i, _ in terms):
            raise ValueError("Perturbation terms need t-power i >= 1")
        rows = max((i for i, _ in terms), default=1)
        cols = max((k for _, k in terms), default=0) + 1
        pert = np.zeros((rows, cols, size, size), dtype=complex)
        for (i, k), matrix in terms.items():
            pert[i - 1, k] += np.asarray(matrix, dtype=complex)
        return cls(indicial, pert)

    @property
    def size(self) -> int:
        return self.perturbation.shape[2]

    def perturbation_at(self, i: int, s: complex) -> np.ndarray:
        """The n x n matrix sum_k A_{i,k} s^k for the t^i term (i >= 1)."""
        if i < 1 or i > self.perturbation.shape[0]:
            return np.zeros((self.size, self.size), dtype=complex)
        powers = powers_of(s, self.perturbation.shape[1])
        return np.einsum("k,kab->ab", powers, self.perturbation[i - 1])
