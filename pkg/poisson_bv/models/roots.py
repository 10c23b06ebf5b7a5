"""Restricted root data and spectral parameters."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from poisson_bv.models.codec import complex_to_pair, decode_array, encode_array


class ModelId(str, Enum):
    """Supported symmetric-space models."""

    H2 = "h2"
    H3 = "h3"
    H2XH2 = "h2xh2"


@dataclass(frozen=True, eq=False)
class RootDatum:
    """Root data of a model, expressed in the dual basis H_j of the simple roots.

    Weyl elements act on coordinate vectors lambda_j = lambda(H_j) by matrix
    multiplication. For the supported models these are signed permutation
    matrices, so the action on the H-basis is the transpose.
    """

    model_id: ModelId
    simple_roots: tuple[str, ...]
    multiplicities: tuple[tuple[int, int], ...]
    rho: np.ndarray
    weyl_elements: tuple[np.ndarray, ...]
    weyl_labels: tuple[str, ...]
    wall_stabilizers: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=complex))
        object.__setattr__(
            self, "weyl_elements", tuple(np.asarray(w, dtype=int) for w in self.weyl_elements)
        )
        self.validate()

    @property
    def rank(self) -> int:
        return len(self.simple_roots)

    @property
    def order(self) -> int:
        return len(self.weyl_elements)

    def wall_degree(self, j: int) -> int:
        """m_j = |W| / |W_j| for the 1-based wall j."""
        return self.order // len(self.wall_stabilizers[j - 1])

    def validate(self) -> None:
        """Check the group and stabilizer invariants.

        Raises:
            ValueError: If the Weyl elements do not form a group or a stabilizer is wrong
        """
        ell = self.rank
        if self.rho.shape != (ell,):
            raise ValueError("rho must have one entry per simple root")
        if len(self.weyl_labels) != len(self.weyl_elements):
            raise ValueError("Every Weyl element needs a label")
        if len(self.wall_stabilizers) != ell:
            raise ValueError("One stabilizer per wall is required")
        if self.index_of(np.eye(ell, dtype=int)) is None:
            raise ValueError("Weyl elements must contain the identity")
        for a in self.weyl_elements:
            if a.shape != (ell, ell):
                raise ValueError("Weyl elements must be rank x rank matrices")
            if self.index_of(np.rint(np.linalg.inv(a)).astype(int)) is None:
                raise ValueError("Weyl elements must be closed under inverses")
            for b in self.weyl_elements:
                if self.index_of(a @ b) is None:
                    raise ValueError("Weyl elements must be closed under products")
        for j, stabilizer in enumerate(self.wall_stabilizers):
            expected = tuple(
                idx
                for idx, w in enumerate(self.weyl_elements)
                if np.array_equal(w.T[:, j], np.eye(ell, dtype=int)[:, j])
            )
            if tuple(stabilizer) != expected:
                raise ValueError(f"Stabilizer of H_{j + 1} does not match the Weyl action")
            if self.order % len(stabilizer) != 0:
                raise ValueError(f"|W| / |W_{j + 1}| is not an integer")

    def index_of(self, matrix: np.ndarray) -> int | None:
        for idx, w in enumerate(self.weyl_elements):
            if np.array_equal(w, matrix):
                return idx
        return None

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "model_id": self.model_id.value,
            "rank": self.rank,
            "simple_roots": list(self.simple_roots),
            "multiplicities": [list(m) for m in self.multiplicities],
            "rho": encode_array(self.rho),
            "weyl_elements": [w.tolist() for w in self.weyl_elements],
            "weyl_labels": list(self.weyl_labels),
            "wall_stabilizers": [list(s) for s in self.wall_stabilizers],
        }


@dataclass(frozen=True, eq=False)
class SpectralParameter:
    """lambda in a_C^*, stored as the coordinates lambda_j = lambda(H_j)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.values, dtype=complex)).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ValueError("Spectral parameter must be a finite complex vector")

    @classmethod
    def coerce(cls, lam, rank: int | None = None) -> "SpectralParameter":
        """Accept a SpectralParameter, scalar or sequence, checking the rank if given."""
        param = lam if isinstance(lam, SpectralParameter) else cls(lam)
        if rank is not None and param.rank != rank:
            raise ValueError(f"Spectral parameter has rank {param.rank}, model needs {rank}")
        return param

    @property
    def rank(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> complex:
        return complex(self.values[j])

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"lambda": encode_array(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralParameter":
        """Create from dictionary."""
        return cls(decode_array(data["lambda"]))


@dataclass
class WeylOrbit:
    """The list w . lambda indexed by Weyl elements."""

    points: list[np.ndarray]
    labels: list[str]
    free: bool

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "points": [encode_array(p) for p in self.points],
            "labels": self.labels,
            "free": self.free,
        }


@dataclass
class GenericityViolation:
    """A failing (condition, wall, Weyl element) triple."""

    condition: str
    wall: int
    weyl_label: str
    value: complex

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "condition": self.condition,
            "j": self.wall,
            "w": self.weyl_label,
            "value": complex_to_pair(self.value),
        }


@dataclass
class GenericityReport:
    """Outcome of the genericity conditions for a spectral parameter."""

    cond_i: bool
    cond_ii: bool
    p_nonzero: bool
    p_value: complex
    violations: list[GenericityViolation] = field(default_factory=list)
    near_violations: list[GenericityViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cond_i and self.cond_ii and self.p_nonzero

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "cond_i": self.cond_i,
            "cond_ii": self.cond_ii,
            "p_nonzero": self.p_nonzero,
            "p_value": complex_to_pair(self.p_value),
            "violations": [v.to_dict() for v in self.violations],
            "near_violations": [v.to_dict() for v in self.near_violations],
        }
