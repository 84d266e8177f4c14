"""Pydantic models for solver results, verification and bound reports."""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_serializer


class GroundStateResult(BaseModel):
    """Exact ground-state energy and degeneracy of one instance."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        json_schema_extra={
            "example": {
                "energy": -2,
                "degeneracy": "8",
                "backend": "exhaustive",
                "elapsed_ms": 0.41,
            }
        },
    )

    energy: int = Field(..., description="Ground-state energy H_0")
    degeneracy: int = Field(..., description="Exact number of ground states |D_0|")
    backend: str = Field(..., description="Backend that produced the result")
    elapsed_ms: Optional[float] = Field(None, description="Wall time in milliseconds")
    states: Optional[list] = Field(
        None,
        exclude=True,
        description="Explicit ground states (SpinState), only when requested",
    )

    @field_serializer("degeneracy")
    def _degeneracy_as_text(self, value: int) -> str:
        # Counts can exceed 2**64 on long strips
        return str(value)


class SampleVerdict(BaseModel):
    """Outcome of one verification sample."""

    index: int = Field(..., description="Sample index (fixes the seed stream)")
    ground_energy: int
    degeneracy: int
    n_groups: int = Field(..., description="Number of exterior classes of ground states")
    min_group_size: int = Field(..., description="Smallest exterior class")
    passed: bool

    @field_serializer("degeneracy")
    def _degeneracy_as_text(self, value: int) -> str:
        return str(value)


class VerificationReport(BaseModel):
    """Per-sample record of a module verification run."""

    spec_id: str
    host: str = Field(..., description="Host lattice description")
    host_sites: int
    collar: int
    n_samples: int
    seed: int
    backend: str
    samples: List[SampleVerdict] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.samples)

    @property
    def failures(self) -> List[SampleVerdict]:
        return [s for s in self.samples if not s.passed]


class DensityEstimate(BaseModel):
    """Monte Carlo frequency of module matches on one block."""

    spec_id: str
    p: float
    samples: int
    matches: int
    estimate: float
    stderr: float
    seed: int


class BoundReport(BaseModel):
    """Inputs and outputs of a degeneracy / entropy-density bound."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "spec_id": "square",
                "lattice_size": 204800,
                "k": 8192,
                "q": 0.0001220703125,
                "density_limit": "1/204800",
                "method": "closed_form",
            }
        },
    )

    spec_id: str
    lattice_size: int = Field(..., description="|Lambda|")
    module_sites: int = Field(..., description="|M|")
    module_bonds: int = Field(..., description="|B(M)|")
    orientations: int
    k: int = Field(..., description="Number of disjoint candidate blocks")
    p: float
    p_s: float
    p_b: float
    f_p: float = Field(..., description="Probability that one orientation's pattern occurs")
    q: float = Field(..., description="Per-block module probability")
    q_exact: Optional[str] = Field(None, description="q as an exact fraction (closed form only)")
    epsilon: float
    delta: float
    exponent_lower: float = Field(..., description="k q (1 - epsilon)")
    entropy_density_lower: float = Field(..., description="exponent_lower / |Lambda|")
    density_limit: Optional[str] = Field(
        None, description="q / |M| as an exact fraction: the epsilon -> 0 density constant"
    )
    k0: Optional[int] = Field(
        None, description="Blocks sufficient for the (epsilon, delta) guarantee (Hoeffding); None when q = 0"
    )
    method: str = Field(..., description="closed_form or monte_carlo")
    samples: Optional[int] = None
    stderr: Optional[float] = None


class RunConfig(BaseModel):
    """Everything that determines one CLI run."""

    subcommand: str
    input_path: Optional[str] = None
    couplings_path: Optional[str] = None
    output_path: Optional[str] = None
    kind: Optional[str] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    boundary: Optional[str] = None
    spec_id: Optional[str] = None
    spec_path: Optional[str] = None
    p: Optional[float] = None
    p_s: float = 1.0
    p_b: float = 1.0
    epsilon: float = 0.01
    delta: float = 0.01
    samples: Optional[int] = None
    seed: int = 0
    backend: str = "auto"
    threads: int = 1


class DegeneracyCertificate(BaseModel):
    """Matching block placements behind a 2^n_found degeneracy lower bound."""

    spec_id: str
    lattice: str = Field(..., description="Lattice description")
    blocks: int = Field(..., description="Disjoint block placements checked")
    n_found: int = Field(..., description="Placements where the module pattern holds")
    anchors: List[List[int]] = Field(default_factory=list, description="(row, col) of each matching placement")

    @computed_field
    @property
    def log2_bound(self) -> int:
        return self.n_found
