"""
Estimate and report schemas returned by the simulation services
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, List, Optional, Tuple


class ProbeResult(BaseModel):
    """Escape statistics of one batch of site trials at a fixed p"""
    p: float = Field(..., ge=0, le=1)
    trials: int = Field(..., ge=0)
    escape_freq: float = Field(..., ge=0, le=1)
    censored_freq: float = Field(..., ge=0, le=1)
    total_steps: int = Field(0, ge=0)
    supercritical: Optional[bool] = None


class ThresholdBudget(BaseModel):
    """Trial budget of the bisection estimator"""
    trials_per_probe: int = Field(..., ge=10)
    escape_height: int = Field(..., ge=1)
    max_steps: int = Field(..., ge=1)
    max_probes: int = Field(..., ge=1)
    threshold_guess: float = Field(0.5, gt=0, lt=1, description="Only positions the subcritical baseline")


class ThresholdEstimate(BaseModel):
    """Bisection bracket for the site threshold"""
    model: str
    p_low: float = Field(..., ge=0)
    p_high: float
    tolerance: float = Field(..., gt=0)
    trials_per_probe: int
    escape_height: int
    max_steps: int
    baseline: ProbeResult
    noise_floor: float = Field(..., ge=0)
    probes: List[ProbeResult] = Field(default_factory=list)
    universal_formula_value: float

    @model_validator(mode="after")
    def validate_bracket(self):
        """Bracket must be ordered"""
        if not self.p_low < self.p_high:
            raise ValueError("p_low must be smaller than p_high")
        return self

    @property
    def midpoint(self) -> float:
        return (self.p_low + self.p_high) / 2

    def contains(self, p: float) -> bool:
        return self.p_low <= p <= self.p_high

    @property
    def total_steps(self) -> int:
        return self.baseline.total_steps + sum(p.total_steps for p in self.probes)


class CrossingEstimate(BaseModel):
    """Limit-rule estimate of a crossing probability"""
    kernel: str
    model: str
    lambda_: float = Field(..., ge=1, alias="lambda")
    a: float = Field(..., gt=0)
    b: float = Field(..., gt=0)
    n_trials: int = Field(..., ge=1)
    p_hat: float = Field(..., ge=0, le=1)
    p_hat_upper: float = Field(..., ge=0, le=1, description="Case2 frequency if every censored trial were Case2")
    tie_rate: float = Field(..., ge=0, le=1)
    censored_rate: float = Field(0.0, ge=0, le=1)
    ci_halfwidth: float = Field(..., ge=0)
    analytic: float = Field(..., gt=0, lt=1)
    case_counts: Dict[str, int] = Field(default_factory=dict)
    total_steps: int = Field(0, ge=0, description="Steps over all trials, censored ones counted to the budget")

    class Config:
        populate_by_name = True

    @property
    def deviation(self) -> float:
        return abs(self.p_hat - self.analytic)


class ScalingCheckReport(BaseModel):
    lambdas: Tuple[float, float]
    t: float = Field(..., gt=0)
    ks_statistic: float = Field(..., ge=0, le=1)
    ks_pvalue: float = Field(..., ge=0, le=1)
    sample_sizes: Tuple[int, int]
    passed: bool
    total_steps: int = Field(0, ge=0)


class ExponentFit(BaseModel):
    exponent: float
    stderr: float = Field(..., ge=0)
    window: Tuple[int, int]
    survivors_at_end: int = Field(..., ge=0)
    total_steps: int = Field(0, ge=0)

    @field_validator("window")
    @classmethod
    def validate_window(cls, v):
        """Window must span at least a factor four"""
        if v[1] < 4 * v[0]:
            raise ValueError("fit window needs n_max >= 4 * n_min")
        return v


class PositivityReport(BaseModel):
    horizon: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    frequency: float = Field(..., ge=0, le=1)
    stderr: float = Field(..., ge=0)
    expected: float = Field(2 / 3, description="Positivity parameter of the limit process")
    total_steps: int = Field(0, ge=0)


class XiGrowthReport(BaseModel):
    """Quantiles of xi_n / n^0.4 per horizon"""
    exponent: float = 0.4
    horizons: List[int]
    quantiles: Dict[int, Dict[str, float]]
    total_steps: int = Field(0, ge=0)

    @property
    def medians(self) -> List[float]:
        return [self.quantiles[n]["0.5"] for n in self.horizons]


class OvershootCheck(BaseModel):
    lambda_: float = Field(..., alias="lambda")
    a: float
    n_trials: int
    rows: List[Dict[str, float]]
    total_steps: int = Field(0, ge=0)

    class Config:
        populate_by_name = True


class CouplingReport(BaseModel):
    """Outcome of co-simulating the bond chain with its dominating walk"""
    trials: int
    steps_checked: int
    violations: int = 0
    censored: int = Field(0, ge=0, description="Trials stopped by the step budget, checked up to it")
    max_gap: int = Field(0, ge=0, description="Largest S_n - B_n seen")
