"""
Experiment configuration and result record schemas
"""
from pydantic import BaseModel, Field, TypeAdapter, field_validator, model_validator
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from core.config import settings

SCHEMA_VERSION = 1

MODEL_PATTERN = "^(tri|quad)$"
KERNEL_PATTERN = "^(bond|face|site)$"
# Config fields that never change what an experiment computes
RUN_ONLY_FIELDS = frozenset({"workers", "out"})


class ExperimentBase(BaseModel):
    """Fields shared by every experiment"""
    schema_version: int = Field(SCHEMA_VERSION, ge=SCHEMA_VERSION, le=SCHEMA_VERSION)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=2**64)
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)
    out: Optional[str] = Field(None, description="Output directory; defaults to OUTPUT_DIR")

    class Config:
        extra = "forbid"

    @property
    def output_dir(self) -> str:
        return self.out or settings.OUTPUT_DIR


class LawDumpConfig(ExperimentBase):
    """Exact q-law head as CSV plus a JSON header"""
    command: Literal["law-dump"] = "law-dump"
    model: str = Field(..., pattern=MODEL_PATTERN)
    kmax: int = Field(..., ge=1, le=100_000)


class ThresholdConfig(ExperimentBase):
    """Site threshold bisection"""
    command: Literal["threshold"] = "threshold"
    model: str = Field("quad", pattern=MODEL_PATTERN)
    tol: float = Field(0.01, gt=0, lt=1)
    trials: int = Field(default_factory=lambda: settings.THRESHOLD_TRIALS_PER_PROBE, ge=10)
    escape_height: int = Field(default_factory=lambda: settings.ESCAPE_HEIGHT, ge=1)
    max_steps: int = Field(default_factory=lambda: settings.SITE_MAX_STEPS, ge=1)
    max_probes: int = Field(default_factory=lambda: settings.THRESHOLD_MAX_PROBES, ge=1)
    threshold_guess: float = Field(0.5, gt=0, lt=1)

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v):
        """Tolerance must not be below the configured floor"""
        if v < settings.THRESHOLD_TOLERANCE_FLOOR:
            raise ValueError(f"tol must be at least {settings.THRESHOLD_TOLERANCE_FLOOR}")
        return v


class CrossingConfig(ExperimentBase):
    """Crossing probability sweep over lambda"""
    command: Literal["crossing"] = "crossing"
    kernel: str = Field(..., pattern=KERNEL_PATTERN)
    model: str = Field(..., pattern=MODEL_PATTERN)
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    lambdas: List[float] = Field(..., min_length=1)
    trials: int = Field(10_000, ge=100)
    max_steps: int = Field(default_factory=lambda: settings.CROSSING_MAX_STEPS, ge=1)
    emit_outcomes: Optional[str] = Field(None, description="CSV path for per-trial outcomes")

    @field_validator("lambdas")
    @classmethod
    def validate_lambdas(cls, v):
        """Every scale must be at least 1"""
        if any(lam < 1 for lam in v):
            raise ValueError("every lambda must be at least 1")
        return v


class LimitCheckConfig(ExperimentBase):
    """One stable-limit check"""
    command: Literal["limit-check"] = "limit-check"
    check: str = Field(..., pattern="^(positivity|ladder|selfsim|xi|overshoot|coupling)$")
    kernel: str = Field("bond", pattern=KERNEL_PATTERN)
    model: str = Field("tri", pattern=MODEL_PATTERN)
    component: Optional[str] = Field(None, pattern="^(free|black)$")
    trials: int = Field(10_000, ge=1)
    horizon: int = Field(10_000, ge=1)
    horizons: List[int] = Field(default_factory=lambda: [10_000, 100_000, 1_000_000])
    lambdas: List[float] = Field(default_factory=lambda: [100.0, 400.0])
    t: float = Field(1.0, gt=0)
    a: float = Field(1.0, gt=0)
    bs: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    max_steps: int = Field(default_factory=lambda: settings.CROSSING_MAX_STEPS, ge=1)

    @model_validator(mode="after")
    def validate_check(self):
        """Check-specific constraints"""
        if self.check == "selfsim" and len(self.lambdas) != 2:
            raise ValueError("selfsim needs exactly two lambdas")
        if self.check == "xi" and self.kernel == "face":
            raise ValueError("xi is not defined for the face kernel")
        if self.check == "coupling" and self.kernel != "bond":
            raise ValueError("coupling is defined for the bond kernel only")
        return self


class ReferenceTablesConfig(ExperimentBase):
    """Exact constants as golden values"""
    command: Literal["reference-tables"] = "reference-tables"


ExperimentConfig = Annotated[
    Union[LawDumpConfig, ThresholdConfig, CrossingConfig, LimitCheckConfig, ReferenceTablesConfig],
    Field(discriminator="command"),
]

experiment_config_adapter = TypeAdapter(ExperimentConfig)


def parse_experiment_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping into the matching config model."""
    return experiment_config_adapter.validate_python(data)


class ResultRecord(BaseModel):
    """Everything needed to reproduce an experiment, and what it produced"""
    command: str
    schema_version: int = SCHEMA_VERSION
    library_version: str
    seed: int
    config: Dict[str, Any]
    outputs: Dict[str, Any] = Field(default_factory=dict)
    trials: int = Field(0, ge=0)
    total_steps: int = Field(0, ge=0)
    started_at: Optional[str] = None
    wall_clock_seconds: Optional[float] = Field(None, ge=0)
    files: List[str] = Field(default_factory=list)

    def reproducible_view(self) -> Dict[str, Any]:
        """
        The record without timing fields, step totals, worker count or output directory;
        equal across reruns with the same seed and parameters.
        """
        view = self.model_dump(exclude={"started_at", "wall_clock_seconds", "total_steps"})
        view["config"] = {k: v for k, v in view["config"].items() if k not in RUN_ONLY_FIELDS}
        return view
