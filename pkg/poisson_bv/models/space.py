"""Symmetric-space models, group elements, points and corner coordinates."""

from dataclasses import dataclass

import numpy as np

from poisson_bv.models.codec import complex_to_pair, pair_to_complex
from poisson_bv.models.roots import ModelId, RootDatum

FACTOR_KINDS: dict[ModelId, tuple[str, ...]] = {
    ModelId.H2: ("real",),
    ModelId.H3: ("complex",),
    ModelId.H2XH2: ("real", "real"),
}

DET_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpaceModel:
    """A concrete model X = G/K.

    Each factor is a rank-one space realized through SL(2, R) ("real", the
    hyperbolic plane) or SL(2, C) ("complex", hyperbolic 3-space) acting on
    upper half-space with origin o = (0, 1).
    """

    model_id: ModelId
    root_datum: RootDatum
    metric_normalization: float = 1.0

    def __post_init__(self) -> None:
        if self.root_datum.model_id != self.model_id:
            raise ValueError("Root datum does not belong to this model")

    @property
    def factors(self) -> tuple[str, ...]:
        return FACTOR_KINDS[self.model_id]

    @property
    def rank(self) -> int:
        return self.root_datum.rank


@dataclass(frozen=True, eq=False)
class GroupElement:
    """One 2 x 2 determinant-one matrix per factor."""

    model_id: ModelId
    factors: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        kinds = FACTOR_KINDS[ModelId(self.model_id)]
        mats = []
        for kind, m in zip(kinds, self.factors, strict=True):
            if kind == "real" and np.any(np.abs(np.imag(np.asarray(m))) > 0):
                raise ValueError("Real model needs real matrices")
            arr = np.real(m) if kind == "real" else m
            mats.append(np.array(arr, dtype=float if kind == "real" else complex))
        object.__setattr__(self, "model_id", ModelId(self.model_id))
        object.__setattr__(self, "factors", tuple(mats))
        self.validate()

    def validate(self) -> None:
        """Check shapes and unit determinant.

        Raises:
            ValueError: If a factor is not a 2 x 2 matrix of determinant 1
        """
        for m in self.factors:
            if m.shape != (2, 2) or not np.all(np.isfinite(m)):
                raise ValueError("Group factors must be finite 2 x 2 matrices")
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det - 1) > DET_TOL * max(1.0, float(np.max(np.abs(m))) ** 2):
                raise ValueError(f"Determinant {det} differs from 1")

    @classmethod
    def identity(cls, model_id: ModelId) -> "GroupElement":
        kinds = FACTOR_KINDS[ModelId(model_id)]
        return cls(model_id, tuple(np.eye(2) for _ in kinds))

    def inverse(self) -> "GroupElement":
        inv = []
        for m in self.factors:
            a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
            inv.append(np.array([[d, -b], [-c, a]]))
        return GroupElement(self.model_id, tuple(inv))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.model_id, tuple(a @ b for a, b in zip(self.factors, other.factors, strict=True))
        )


@dataclass(frozen=True, eq=False)
class SpacePoint:
    """A point of the model.

    Real factors are stored as a complex disk coordinate w, |w| < 1. The
    complex factor (h3) is stored as upper half-space coordinates (x, y, h), h > 0.
    """

    model_id: ModelId
    coords: np.ndarray

    def __post_init__(self) -> None:
        model = ModelId(self.model_id)
        dtype = float if model == ModelId.H3 else complex
        coords = np.atleast_1d(np.asarray(self.coords, dtype=dtype)).copy()
        coords.setflags(write=False)
        object.__setattr__(self, "model_id", model)
        object.__setattr__(self, "coords", coords)
        self.validate()

    def validate(self) -> None:
        """Check the point lies in the model domain.

        Raises:
            ValueError: If the point lies outside the model domain
        """
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("Point coordinates must be finite")
        if self.model_id == ModelId.H3:
            if self.coords.shape != (3,) or self.coords[2] <= 0:
                raise ValueError("h3 points need (x, y, h) with h > 0")
        else:
            expected = len(FACTOR_KINDS[self.model_id])
            if self.coords.shape != (expected,) or np.any(np.abs(self.coords) >= 1):
                raise ValueError("Disk coordinates must lie in the open unit disk")

    @classmethod
    def origin(cls, model_id: ModelId) -> "SpacePoint":
        model = ModelId(model_id)
        if model == ModelId.H3:
            return cls(model, np.array([0.0, 0.0, 1.0]))
        return cls(model, np.zeros(len(FACTOR_KINDS[model]), dtype=complex))

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        if self.model_id == ModelId.H3:
            coords = [float(c) for c in self.coords]
        else:
            coords = [complex_to_pair(c) for c in self.coords]
        return {"model": self.model_id.value, "coords": coords}

    @classmethod
    def from_dict(cls, data: dict) -> "SpacePoint":
        """Create from dictionary."""
        model = ModelId(data["model"])
        if model == ModelId.H3:
            return cls(model, np.asarray(data["coords"], dtype=float))
        return cls(model, np.asarray([pair_to_complex(c) for c in data["coords"]]))


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point of B = K/M.

    Real factors carry a disk angle in [0, 2 pi). The h3 boundary sphere is
    parametrized by (polar, azimuth) with polar in [0, pi] and azimuth in [0, 2 pi).
    """

    model_id: ModelId
    angles: np.ndarray

    def __post_init__(self) -> None:
        model = ModelId(self.model_id)
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float)).copy()
        if not np.all(np.isfinite(angles)):
            raise ValueError("Boundary angles must be finite")
        if model == ModelId.H3:
            if angles.shape != (2,) or not 0 <= angles[0] <= np.pi:
                raise ValueError("h3 boundary points need (polar in [0, pi], azimuth)")
            angles[1] = np.mod(angles[1], 2 * np.pi)
        else:
            if angles.shape != (len(FACTOR_KINDS[model]),):
                raise ValueError("One angle per factor is required")
            angles = np.mod(angles, 2 * np.pi)
        angles.setflags(write=False)
        object.__setattr__(self, "model_id", model)
        object.__setattr__(self, "angles", angles)

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"model": self.model_id.value, "angles": [float(a) for a in self.angles]}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryPoint":
        """Create from dictionary."""
        return cls(ModelId(data["model"]), np.asarray(data["angles"], dtype=float))


@dataclass(frozen=True, eq=False)
class CornerCoordinates:
    """Corner chart coordinates (b, t) with x = k_b exp(-sum log t_j H_j) . o."""

    b: BoundaryPoint
    t: np.ndarray

    def __post_init__(self) -> None:
        t = np.atleast_1d(np.asarray(self.t, dtype=float)).copy()
        if t.shape != (len(FACTOR_KINDS[self.b.model_id]),):
            raise ValueError("One radial coordinate per wall is required")
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise ValueError("Corner coordinates need 0 <= t_j <= 1")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @property
    def interior(self) -> bool:
        return bool(np.all((self.t > 0) & (self.t < 1)))

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {"b": self.b.to_dict(), "t": [float(x) for x in self.t]}


@dataclass
class IwasawaDecomposition:
    """g = k exp(H) n."""

    k: GroupElement
    H: np.ndarray
    n: GroupElement

    def reconstruct(self) -> GroupElement:
        mats = []
        for k, h, n in zip(self.k.factors, self.H, self.n.factors, strict=True):
            a = np.diag([np.exp(h / 2), np.exp(-h / 2)])
            mats.append(k @ a @ n)
        return GroupElement(self.k.model_id, tuple(mats))
