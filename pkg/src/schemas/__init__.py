# Pydantic schemas for experiment configs, estimates and records
from .estimates import *
from .experiment import *

__all__ = [
    # Estimates
    "ProbeResult", "ThresholdBudget", "ThresholdEstimate", "CrossingEstimate",
    "ScalingCheckReport", "ExponentFit", "PositivityReport", "XiGrowthReport",
    "OvershootCheck", "CouplingReport",
    # Experiments
    "CrossingConfig", "ExperimentConfig", "LawDumpConfig", "LimitCheckConfig",
    "ReferenceTablesConfig", "ResultRecord", "ThresholdConfig", "parse_experiment_config",
]
