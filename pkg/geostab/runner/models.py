"""
Scenario schema for geostab.
A scenario file is a JSON object with `system`, `analysis`, `output` and `seed`.
"""
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import (
    DEFAULT_ATOL, DEFAULT_HORIZON, DEFAULT_JACOBI_CONSTANT, DEFAULT_MAX_STEPS, DEFAULT_METHOD,
    DEFAULT_RENORM_INTERVAL, DEFAULT_RTOL, DEFAULT_STEP, LOCAL_STABILITY_TOL
)

Entry = Union[str, float]
AnalysisType = Literal["simulate", "lyapunov", "spectrum", "local-stability", "jacobi-translate", "compare"]

# which module an analysis failure belongs to
ANALYSIS_MODULES: Dict[str, str] = {
    "simulate": "flow",
    "lyapunov": "lyapunov",
    "spectrum": "lyapunov",
    "local-stability": "kcc",
    "jacobi-translate": "maupertuis",
    "compare": "maupertuis",
}


class SystemBlock(BaseModel):
    """
    Exactly one system variant.

    flow:       `components` over x1..xN, or `acceleration` over x1..xn, u1..un
    lagrangian: `lagrangian` over x1..xn, u1..un
    natural:    `kinetic` matrix and `potential` over x1..xn
    metric:     `metric` matrix over x1..xn (geodesic flow)
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["flow", "lagrangian", "natural", "metric"]
    dimension: int = Field(gt=0)
    name: Optional[str] = None
    parameters: Dict[str, float] = Field(default_factory=dict)
    components: Optional[List[str]] = None
    acceleration: Optional[List[str]] = None
    lagrangian: Optional[str] = None
    kinetic: Optional[List[List[Entry]]] = None
    potential: Optional[str] = None
    metric: Optional[List[List[Entry]]] = None

    @model_validator(mode="after")
    def one_variant(self) -> "SystemBlock":
        present = {
            "components": self.components is not None,
            "acceleration": self.acceleration is not None,
            "lagrangian": self.lagrangian is not None,
            "kinetic": self.kinetic is not None,
            "potential": self.potential is not None,
            "metric": self.metric is not None,
        }
        allowed = {
            "flow": ({"components"}, {"acceleration"}),
            "lagrangian": ({"lagrangian"},),
            "natural": ({"kinetic", "potential"},),
            "metric": ({"metric"},),
        }[self.kind]
        given = {key for key, value in present.items() if value}
        if given not in allowed:
            expected = " or ".join("+".join(sorted(option)) for option in allowed)
            raise ValueError(f"system of kind {self.kind!r} needs {expected}, got {sorted(given) or 'nothing'}")
        return self

    @property
    def phase_dimension(self) -> int:
        """N of the state the analyses integrate."""
        if self.kind == "flow" and self.components is not None:
            return self.dimension
        return 2 * self.dimension


class SeminormBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["euclidean", "vertical_lift", "lagrange_metric", "custom"] = "euclidean"
    lift: Literal["vertical", "diagonal"] = "vertical"
    entries: Optional[List[List[Entry]]] = None
    policy: Literal["allow", "reject"] = "allow"

    @model_validator(mode="after")
    def custom_entries(self) -> "SeminormBlock":
        if self.kind == "custom" and not self.entries:
            raise ValueError("custom seminorm needs entries")
        return self


class IntegratorBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["rk45", "rk4"] = DEFAULT_METHOD
    step: float = Field(DEFAULT_STEP, gt=0)
    atol: float = Field(DEFAULT_ATOL, gt=0)
    rtol: float = Field(DEFAULT_RTOL, gt=0)
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=1)


class AnalysisBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: AnalysisType
    name: Optional[str] = None
    initial_state: List[float]
    horizon: float = Field(DEFAULT_HORIZON, gt=0)
    interval: float = Field(DEFAULT_RENORM_INTERVAL, gt=0)
    seminorm: SeminormBlock = Field(default_factory=SeminormBlock)
    perturbation: Optional[List[float]] = None
    frame: Optional[List[List[float]]] = None
    operator: Literal["P", "rtilde"] = "P"
    energy: Optional[float] = None
    jacobi_constant: float = Field(DEFAULT_JACOBI_CONSTANT, gt=0)
    tolerance: float = Field(0.05, ge=0)
    local_tolerance: float = Field(LOCAL_STABILITY_TOL, gt=0)
    alternate_potential: Optional[str] = None
    probe_points: Optional[List[List[float]]] = None
    integrator: IntegratorBlock = Field(default_factory=IntegratorBlock)

    @property
    def label(self) -> str:
        return self.name or self.type


class OutputBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = None
    prefix: str = "geostab"
    formats: List[Literal["json", "csv"]] = Field(default_factory=lambda: ["json", "csv"])


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemBlock
    analysis: Union[AnalysisBlock, List[AnalysisBlock]]
    output: OutputBlock = Field(default_factory=OutputBlock)
    seed: int = 0

    @field_validator("analysis")
    @classmethod
    def non_empty(cls, value):
        if isinstance(value, list) and not value:
            raise ValueError("analysis list is empty")
        return value

    @model_validator(mode="after")
    def unique_names(self) -> "Scenario":
        labels = [block.label for block in self.analyses]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"analysis names must be unique, repeated: {duplicates}")
        return self

    @property
    def analyses(self) -> List[AnalysisBlock]:
        return self.analysis if isinstance(self.analysis, list) else [self.analysis]
