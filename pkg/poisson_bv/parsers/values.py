"""Parser for the command-line value syntax: complex numbers, boundary data and operators."""

import logging
import re

import numpy as np

from poisson_bv.models.boundary import BoundaryFunction
from poisson_bv.models.operator import ThetaOperator
from poisson_bv.models.roots import ModelId, SpectralParameter
from poisson_bv.models.series import DeltaLayer, FormalSeries
from poisson_bv.models.space import FACTOR_KINDS

logger = logging.getLogger(__name__)

NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


class ValueParser:
    """Parse the textual value forms accepted on the command line.

    Complex numbers are written ``a``, ``bi`` or ``a+bi``. Boundary data is one of
    ``const:a``, ``fourier:c_-K,...,c_K`` (rows separated by ``;`` on the torus)
    or a trigonometric sum such as ``cos(3)+0.5*sin(1)`` or ``cos(1@1)*cos(2@2)``,
    where ``@j`` names the circle factor (default 1).
    """

    IMAGINARY_PATTERN = re.compile(rf"^(?P<im>[+-]?(?:{NUMBER})?)i$")
    COMPLEX_PATTERN = re.compile(rf"^(?P<re>[+-]?{NUMBER})(?:(?P<im>[+-](?:{NUMBER})?)i)?$")
    TERM_SPLIT_PATTERN = re.compile(r"(?<![eE*(])(?=[+-])")
    TERM_PATTERN = re.compile(
        rf"^(?P<coef>{NUMBER})?\*?(?P<factors>(?:(?:cos|sin)\(\d+(?:@\d+)?\)\*?)*)$"
    )
    FACTOR_PATTERN = re.compile(r"(?P<kind>cos|sin)\((?P<k>\d+)(?:@(?P<axis>\d+))?\)")
    OPERATOR_TERM_PATTERN = re.compile(r"^(?P<i>\d+)\s*,\s*(?P<k>\d+)\s*=\s*(?P<value>\S+)$")

    def parse_complex(self, text: str) -> complex:
        """Parse ``a``, ``bi`` or ``a+bi``.

        Raises:
            ValueError: If the text is not a complex number
        """
        cleaned = text.strip().replace(" ", "").replace("j", "i")
        match = self.IMAGINARY_PATTERN.match(cleaned)
        if match:
            return complex(0.0, self._imaginary_part(match.group("im")))
        match = self.COMPLEX_PATTERN.match(cleaned)
        if not match:
            raise ValueError(f"Cannot parse complex number '{text}'")
        imag = match.group("im")
        return complex(float(match.group("re")), 0.0 if imag is None else self._imaginary_part(imag))

    @staticmethod
    def _imaginary_part(text: str) -> float:
        if text in ("", "+"):
            return 1.0
        if text == "-":
            return -1.0
        return float(text)

    def parse_complex_list(self, text: str) -> list[complex]:
        """Comma separated complex numbers."""
        items = [item for item in text.split(",") if item.strip()]
        if not items:
            raise ValueError("Expected at least one value")
        return [self.parse_complex(item) for item in items]

    def parse_lambda(self, text: str, rank: int | None = None) -> SpectralParameter:
        """Spectral parameter as comma separated coordinates lambda(H_j)."""
        return SpectralParameter.coerce(self.parse_complex_list(text), rank)

    def parse_boundary_function(self, text: str, model_id: ModelId | str) -> BoundaryFunction:
        """Parse a boundary data string for the given model.

        Raises:
            ValueError: If the string is malformed or does not fit the model
        """
        model_id = ModelId(model_id)
        dims = 1 if model_id == ModelId.H3 else len(FACTOR_KINDS[model_id])
        data = text.strip()
        if data.startswith("const:"):
            return BoundaryFunction.constant(model_id, self.parse_complex(data[len("const:"):]))
        if data.startswith("fourier:"):
            return BoundaryFunction(model_id, fourier=self._parse_fourier(data[len("fourier:"):], dims))
        if model_id == ModelId.H3:
            raise ValueError("h3 boundary data must be given as const:a or fourier:a")
        return BoundaryFunction(model_id, fourier=self._parse_trig_sum(data, dims))

    def _parse_fourier(self, body: str, dims: int) -> np.ndarray:
        rows = [self.parse_complex_list(row) for row in body.split(";") if row.strip()]
        if not rows:
            raise ValueError("Fourier data has no coefficients")
        if dims == 1:
            if len(rows) != 1:
                raise ValueError("Rank-one Fourier data takes a single row")
            coeffs = np.array(rows[0], dtype=complex)
        else:
            if len(rows) == 1 and len(rows[0]) == 1:
                return np.full((1,) * dims, rows[0][0], dtype=complex)
            if any(len(row) != len(rows) for row in rows):
                raise ValueError("Torus Fourier data must be a square table")
            coeffs = np.array(rows, dtype=complex)
        if coeffs.shape[0] % 2 != 1:
            raise ValueError("Fourier data needs an odd number of coefficients per axis")
        return coeffs

    def _parse_trig_sum(self, text: str, dims: int) -> np.ndarray:
        pieces = [p for p in self.TERM_SPLIT_PATTERN.split(text.replace(" ", "")) if p]
        if not pieces:
            raise ValueError("Empty boundary data")
        terms = []
        for piece in pieces:
            sign = -1.0 if piece.startswith("-") else 1.0
            body = piece.lstrip("+-")
            match = self.TERM_PATTERN.match(body)
            if not body or not match or body == "*":
                raise ValueError(f"Cannot parse term '{piece}'")
            coef = sign * (float(match.group("coef")) if match.group("coef") else 1.0)
            axes = [np.ones(1, dtype=complex) for _ in range(dims)]
            for factor in self.FACTOR_PATTERN.finditer(match.group("factors")):
                axis = int(factor.group("axis") or 1) - 1
                if not 0 <= axis < dims:
                    raise ValueError(f"Factor index in '{piece}' exceeds {dims} circle(s)")
                axes[axis] = np.convolve(axes[axis], self._trig_coefficients(factor))
            width = max(a.shape[0] for a in axes)
            axes = [np.pad(a, (width - a.shape[0]) // 2) for a in axes]
            term = axes[0]
            for extra in axes[1:]:
                term = np.multiply.outer(term, extra)
            terms.append(coef * term)
        size = max(t.shape[0] for t in terms)
        total = np.zeros((size,) * dims, dtype=complex)
        for term in terms:
            pad = (size - term.shape[0]) // 2
            total += np.pad(term, [(pad, pad)] * dims)
        logger.debug(f"Parsed '{text}' into Fourier data with band limit {(size - 1) // 2}")
        return total

    @staticmethod
    def _trig_coefficients(factor: re.Match) -> np.ndarray:
        """Centered coefficients of cos(k theta) or sin(k theta)."""
        k = int(factor.group("k"))
        coeffs = np.zeros(2 * k + 1, dtype=complex)
        if k == 0:
            coeffs[0] = 1.0 if factor.group("kind") == "cos" else 0.0
        elif factor.group("kind") == "cos":
            coeffs[0] = coeffs[-1] = 0.5
        else:
            coeffs[0], coeffs[-1] = 0.5j, -0.5j
        return coeffs

    def parse_operator(self, text: str) -> ThetaOperator:
        """Parse ``i,k=c;...`` into sum c t^i theta^k.

        Raises:
            ValueError: If a term is malformed
        """
        terms: dict[tuple[int, int], complex] = {}
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            match = self.OPERATOR_TERM_PATTERN.match(chunk.strip())
            if not match:
                raise ValueError(f"Cannot parse operator term '{chunk}' (expected i,k=c)")
            key = (int(match.group("i")), int(match.group("k")))
            terms[key] = terms.get(key, 0j) + self.parse_complex(match.group("value"))
        return ThetaOperator.from_terms(terms)

    def parse_series(self, text: str) -> FormalSeries:
        """Comma separated Taylor coefficients u_0, u_1, ..."""
        return FormalSeries(np.array(self.parse_complex_list(text)))

    def parse_delta_layer(self, text: str) -> DeltaLayer:
        """Comma separated layer coefficients f_0, f_1, ... of sum f_k delta^(k)."""
        return DeltaLayer(np.array(self.parse_complex_list(text)))
