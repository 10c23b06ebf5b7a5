"""Boundary data, extraction settings and boundary-value result types."""

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from poisson_bv.models.codec import complex_to_pair, decode_array, encode_array, pair_to_complex
from poisson_bv.models.roots import ModelId
from poisson_bv.models.series import FormalSeries
from poisson_bv.models.space import FACTOR_KINDS, BoundaryPoint


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """A function on the boundary circle or torus.

    ``fourier`` holds centered coefficients c_k, -K <= k <= K, one axis per
    circle factor. ``samples`` holds values on the uniform grid 2 pi j / n.
    On the h3 sphere only constant functions are represented (fourier of shape (1,)).
    """

    model_id: ModelId
    fourier: np.ndarray | None = None
    samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "model_id", ModelId(self.model_id))
        for name in ("fourier", "samples"):
            value = getattr(self, name)
            if value is not None:
                arr = np.array(value, dtype=complex, ndmin=1)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        self.validate()

    def validate(self) -> None:
        """Validate shapes and values.

        Raises:
            ValueError: If neither representation is given, shapes are inconsistent,
                or values are not finite
        """
        if self.fourier is None and self.samples is None:
            raise ValueError("Boundary function needs fourier coefficients or samples")
        dims = self.dims
        if self.fourier is not None:
            shape = self.fourier.shape
            if len(shape) != dims or len(set(shape)) != 1 or shape[0] % 2 != 1:
                raise ValueError(f"Fourier coefficients need shape (2K+1,)*{dims}")
            if not np.all(np.isfinite(self.fourier)):
                raise ValueError("Fourier coefficients must be finite")
        if self.samples is not None:
            shape = self.samples.shape
            if len(shape) != dims or len(set(shape)) != 1 or shape[0] < 1:
                raise ValueError(f"Samples need shape (n,)*{dims}")
            if not np.all(np.isfinite(self.samples)):
                raise ValueError("Samples must be finite")
        if self.fourier is not None and self.samples is not None:
            if self.samples.shape[0] < self.fourier.shape[0]:
                raise ValueError("Sample count must be at least 2 * band_limit + 1")
        if self.model_id == ModelId.H3:
            if self.samples is not None or self.fourier.shape != (1,):
                raise ValueError("h3 boundary data is limited to constants")

    @property
    def dims(self) -> int:
        return len(FACTOR_KINDS[self.model_id]) if self.model_id != ModelId.H3 else 1

    @property
    def band_limit(self) -> int:
        if self.fourier is not None:
            return (self.fourier.shape[0] - 1) // 2
        return (self.samples.shape[0] - 1) // 2

    @classmethod
    def constant(cls, model_id: ModelId, value: complex = 1.0) -> "BoundaryFunction":
        dims = 1 if ModelId(model_id) == ModelId.H3 else len(FACTOR_KINDS[ModelId(model_id)])
        return cls(model_id, fourier=np.full((1,) * dims, complex(value)))

    def fourier_coefficients(self) -> np.ndarray:
        """Centered Fourier coefficients; samples are transformed by FFT without the Nyquist mode."""
        if self.fourier is not None:
            return np.array(self.fourier)
        n = self.samples.shape[0]
        coeffs = np.fft.fftshift(np.fft.fftn(self.samples)) / n**self.dims
        if n % 2 == 0:
            coeffs = coeffs[(slice(1, None),) * self.dims]
        return coeffs

    def evaluate(self, angles) -> np.ndarray:
        """Evaluate at angles of shape (..., dims) (rank one also accepts shape (...))."""
        coeffs = self.fourier_coefficients()
        if self.model_id == ModelId.H3:
            return np.full(np.shape(angles)[:-1], coeffs[0], dtype=complex)
        angles = np.asarray(angles, dtype=float)
        if self.dims == 1 and (angles.ndim == 0 or angles.shape[-1] != 1):
            angles = angles[..., np.newaxis]
        K = (coeffs.shape[0] - 1) // 2
        modes = np.arange(-K, K + 1)
        values = coeffs
        result_shape = angles.shape[:-1]
        flat = angles.reshape(-1, self.dims)
        out = np.empty(flat.shape[0], dtype=complex)
        for row, point in enumerate(flat):
            acc = values
            for axis in range(self.dims):
                acc = np.exp(1j * modes * point[axis]) @ acc
            out[row] = acc
        return out.reshape(result_shape)

    def __call__(self, b: BoundaryPoint) -> complex:
        if b.model_id != self.model_id:
            raise ValueError("Boundary point belongs to a different model")
        return complex(self.evaluate(np.asarray(b.angles)))

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        data: dict[str, Any] = {"model": self.model_id.value}
        if self.fourier is not None:
            data["fourier"] = encode_array(self.fourier)
        if self.samples is not None:
            data["samples"] = encode_array(self.samples)
            data["grid"] = int(self.samples.shape[0])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryFunction":
        """Create from dictionary."""
        fourier = decode_array(data["fourier"]) if "fourier" in data else None
        samples = decode_array(data["samples"]) if "samples" in data else None
        if samples is not None and "grid" in data and samples.shape[0] != data["grid"]:
            raise ValueError("Sample count does not match the declared grid")
        return cls(ModelId(data["model"]), fourier=fourier, samples=samples)


@dataclass
class ExtractionConfig:
    """Radial grid and fit settings for leading-coefficient extraction.

    The grid on wall j is t0 * ratio**i, i < n_points. ``wall_overrides`` maps a
    wall index to replacement values for t0, ratio, n_points or correction_orders.
    """

    t0: float = 0.2
    ratio: float = 0.7
    n_points: int = 12
    correction_orders: int = 3
    cond_max: float = 1e8
    collision_tol: float = 1e-6
    series_truncation: int = 40
    wall_overrides: dict[int, dict[str, Any]] = field(default_factory=dict)

    OVERRIDABLE = ("t0", "ratio", "n_points", "correction_orders")

    def __post_init__(self) -> None:
        self.wall_overrides = {int(j): dict(v) for j, v in self.wall_overrides.items()}
        self.validate()

    def validate(self) -> None:
        """Validate settings.

        Raises:
            ValueError: If any setting is out of range
        """
        if not 0 < self.t0 < 1:
            raise ValueError("t0 must lie in (0, 1)")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.correction_orders < 0:
            raise ValueError("correction_orders must be non-negative")
        if self.n_points < self.correction_orders + 3:
            raise ValueError("n_points leaves no room for a least-squares fit")
        if self.cond_max <= 1 or self.collision_tol <= 0 or self.series_truncation < 1:
            raise ValueError("cond_max, collision_tol and series_truncation must be positive")
        for j, override in self.wall_overrides.items():
            unknown = set(override) - set(self.OVERRIDABLE)
            if unknown:
                raise ValueError(f"Unknown override keys for wall {j}: {sorted(unknown)}")
            self.for_wall(j)

    def for_wall(self, j: int) -> "ExtractionConfig":
        """Settings for wall j with its overrides applied."""
        override = self.wall_overrides.get(j)
        if not override:
            return self
        return replace(self, wall_overrides={}, **override)

    def grid(self, j: int = 1) -> np.ndarray:
        cfg = self.for_wall(j)
        return cfg.t0 * cfg.ratio ** np.arange(cfg.n_points)

    def check_basis(self, j: int, n_basis: int) -> None:
        """Require n_points >= n_basis + 2 on wall j.

        Raises:
            ValueError: If the grid is too short for the basis
        """
        cfg = self.for_wall(j)
        if cfg.n_points < n_basis + 2:
            raise ValueError(
                f"Wall {j} needs at least {n_basis + 2} grid points, has {cfg.n_points}"
            )

    def with_scaled_start(self, factor: float) -> "ExtractionConfig":
        """Scale t0 on every wall (used to resolve higher Fourier modes)."""
        overrides = {
            j: {**o, "t0": o["t0"] * factor} if "t0" in o else dict(o)
            for j, o in self.wall_overrides.items()
        }
        return replace(self, t0=self.t0 * factor, wall_overrides=overrides)

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "t0": self.t0,
            "ratio": self.ratio,
            "n_points": self.n_points,
            "correction_orders": self.correction_orders,
            "cond_max": self.cond_max,
            "collision_tol": self.collision_tol,
            "series_truncation": self.series_truncation,
            "wall_overrides": {str(j): o for j, o in sorted(self.wall_overrides.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionConfig":
        """Create from dictionary."""
        known = {k: v for k, v in data.items() if k != "wall_overrides"}
        overrides = {int(j): o for j, o in data.get("wall_overrides", {}).items()}
        return cls(**known, wall_overrides=overrides)


@dataclass
class ExpansionTerm:
    """amplitude * prod_j factors[j](t_j) for one Weyl element."""

    weyl_label: str
    amplitude: complex
    factors: tuple[FormalSeries, ...]

    @property
    def exponents(self) -> np.ndarray:
        return np.array([s.exponent_offset for s in self.factors])

    def evaluate(self, t) -> complex:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        value = complex(self.amplitude)
        for series, tj in zip(self.factors, t, strict=True):
            value *= complex(series.evaluate(tj))
        return value

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "w": self.weyl_label,
            "amplitude": complex_to_pair(self.amplitude),
            "factors": [s.to_dict() for s in self.factors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExpansionTerm":
        """Create from dictionary."""
        return cls(
            weyl_label=data["w"],
            amplitude=pair_to_complex(data["amplitude"]),
            factors=tuple(FormalSeries.from_dict(s) for s in data["factors"]),
        )


@dataclass
class AsymptoticExpansion:
    """u(b, t) = sum_w amplitude_w prod_j t_j^{(rho - w lambda)_j} (series in t_j)."""

    model_id: ModelId
    terms: list[ExpansionTerm]

    def __post_init__(self) -> None:
        self.model_id = ModelId(self.model_id)
        self.validate()

    def validate(self) -> None:
        """Check term shapes and that no two exponent vectors differ by a non-negative integer vector.

        Raises:
            ValueError: If the expansion is malformed or exponents collide
        """
        rank = 1 if self.model_id != ModelId.H2XH2 else 2
        if not self.terms:
            raise ValueError("Expansion needs at least one term")
        for term in self.terms:
            if len(term.factors) != rank:
                raise ValueError(f"Each term needs {rank} factor series")
        for a in range(len(self.terms)):
            for b in range(a + 1, len(self.terms)):
                diff = self.terms[a].exponents - self.terms[b].exponents
                near_int = np.abs(diff - np.round(diff.real)) < 1e-9
                if np.all(near_int) and (
                    np.all(np.round(diff.real) >= 0) or np.all(np.round(diff.real) <= 0)
                ):
                    raise ValueError(
                        f"Exponents of {self.terms[a].weyl_label} and "
                        f"{self.terms[b].weyl_label} differ by integers"
                    )

    @property
    def truncation(self) -> int:
        return min(s.truncation for term in self.terms for s in term.factors)

    def term(self, label: str) -> ExpansionTerm:
        for term in self.terms:
            if term.weyl_label == label:
                return term
        raise KeyError(f"No term for Weyl element '{label}'")

    def evaluate(self, t) -> complex:
        return sum((term.evaluate(t) for term in self.terms), 0j)

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"model": self.model_id.value, "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "AsymptoticExpansion":
        """Create from dictionary."""
        return cls(ModelId(data["model"]), [ExpansionTerm.from_dict(t) for t in data["terms"]])


@dataclass
class ExtractionResult:
    """Leading coefficient of one fit with its diagnostics."""

    value: complex
    condition_numbers: list[float]
    error_estimate: float
    residual: float
    basis_sizes: list[int]

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "value": complex_to_pair(self.value),
            "condition_numbers": self.condition_numbers,
            "error_estimate": self.error_estimate,
            "residual": self.residual,
            "basis_sizes": self.basis_sizes,
        }


@dataclass
class DeltaExtraction:
    """Outcome of applying the divided wall operators to an expansion."""

    bv: complex
    delta_coefficient: complex
    p_value: complex
    leading_coefficient: complex
    annihilation_residual: float

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "bv": complex_to_pair(self.bv),
            "delta_coefficient": complex_to_pair(self.delta_coefficient),
            "p_value": complex_to_pair(self.p_value),
            "leading_coefficient": complex_to_pair(self.leading_coefficient),
            "annihilation_residual": self.annihilation_residual,
        }


@dataclass
class InversionPoint:
    b: BoundaryPoint
    bv: complex
    target: complex

    @property
    def error(self) -> float:
        return abs(self.bv - self.target)

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "b": [float(a) for a in self.b.angles],
            "bv": complex_to_pair(self.bv),
            "target": complex_to_pair(self.target),
            "error": self.error,
        }


@dataclass
class InversionReport:
    """Residual of bv(P_lambda f) against c(lambda) f on a boundary grid."""

    residual_sup: float
    c_used: complex
    c_route: str
    points: list[InversionPoint]
    c_alternative: complex | None = None

    @property
    def per_point_errors(self) -> list[float]:
        return [p.error for p in self.points]

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        data = {
            "residual_sup": self.residual_sup,
            "c_used": complex_to_pair(self.c_used),
            "c_route": self.c_route,
            "points": [p.to_dict() for p in self.points],
        }
        if self.c_alternative is not None:
            data["c_alternative"] = complex_to_pair(self.c_alternative)
        return data


@dataclass
class FatouResult:
    """Empirical decay of t^{-sigma} P_lambda f(b, t) - c(lambda) f(b)."""

    rate: float
    expected_rate: float
    t_values: list[float]
    errors: list[float]

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "rate": self.rate,
            "expected_rate": self.expected_rate,
            "t": self.t_values,
            "errors": self.errors,
        }


@dataclass
class EquivarianceResult:
    """bv of the translated eigenfunction against the principal series action on bv."""

    max_error: float
    points: list[InversionPoint]

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"max_error": self.max_error, "points": [p.to_dict() for p in self.points]}
