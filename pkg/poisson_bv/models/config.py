"""Run configuration shared by the command line and config files."""

from dataclasses import dataclass, field
from typing import Any

from poisson_bv.models.boundary import ExtractionConfig
from poisson_bv.models.codec import decode_array, encode_array
from poisson_bv.models.roots import ModelId, SpectralParameter
from poisson_bv.models.space import FACTOR_KINDS

OUTPUT_FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    """Everything one run needs besides the subcommand.

    ``f`` keeps the boundary data in its textual form (``const:1``,
    ``fourier:...`` or a trigonometric sum) so that files round-trip exactly.
    """

    model: ModelId
    lam: SpectralParameter
    f: str = "const:1"
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    tol: float = 1e-4
    output: str = "json"
    seed: int = 0
    grid: int | None = None

    def __post_init__(self) -> None:
        self.model = ModelId(self.model)
        self.lam = SpectralParameter.coerce(self.lam)
        self.validate()

    def validate(self) -> None:
        """Validate the configuration.

        Raises:
            ValueError: If a field is out of range or inconsistent with the model
        """
        rank = len(FACTOR_KINDS[self.model])
        if self.lam.rank != rank:
            raise ValueError(f"Model {self.model.value} needs {rank} lambda coordinate(s)")
        if not self.f.strip():
            raise ValueError("Boundary data must not be empty")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.output not in OUTPUT_FORMATS:
            raise ValueError(f"output must be one of {OUTPUT_FORMATS}")
        if self.grid is not None and self.grid < 1:
            raise ValueError("grid must be positive")
        self.extraction.validate()

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "model": self.model.value,
            "lambda": encode_array(self.lam.values),
            "f": self.f,
            "extraction": self.extraction.to_dict(),
            "tol": self.tol,
            "output": self.output,
            "seed": self.seed,
            "grid": self.grid,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        """Create from dictionary."""
        return cls(
            model=ModelId(data["model"]),
            lam=SpectralParameter(decode_array(data["lambda"])),
            f=data.get("f", "const:1"),
            extraction=ExtractionConfig.from_dict(data.get("extraction", {})),
            tol=float(data.get("tol", 1e-4)),
            output=data.get("output", "json"),
            seed=int(data.get("seed", 0)),
            grid=data.get("grid"),
        )
