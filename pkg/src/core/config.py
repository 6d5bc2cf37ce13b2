from pydantic_settings import BaseSettings
from pydantic import Field
import logging

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Application Settings
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    DEFAULT_SEED: int = Field(default=20150601, ge=0, lt=2**64, description="Seed used when none is given")
    WORKERS: int = Field(default=1, ge=1, description="Worker processes for trial pools")
    OUTPUT_DIR: str = Field(default="results", description="Directory for records and CSV streams")

    # Random streams
    RNG_BATCH_SIZE: int = Field(default=4096, ge=1, description="Uniforms fetched per refill of a stream buffer")

    # Heavy-tail tables
    TAIL_EXACT_LIMIT: int = Field(default=512, ge=1, description="Entries tabulated as exact rationals")
    TAIL_PRECISION_DPS: int = Field(default=40, ge=20, description="mpmath precision for the extended tail")
    TAIL_TABLE_MAX_SIZE: int = Field(default=2**22, ge=1024, description="Stored entries before the tail is walked on demand")

    # Site threshold experiment
    ESCAPE_HEIGHT: int = Field(default=10_000, ge=1, description="Black length counted as survival")
    SITE_MAX_STEPS: int = Field(default=1_000_000, ge=1, description="Chain steps before a site trial is censored")
    THRESHOLD_TRIALS_PER_PROBE: int = Field(default=2000, ge=10, description="Trials per bisection probe")
    THRESHOLD_MAX_PROBES: int = Field(default=20, ge=1, description="Probes allowed before giving up")
    THRESHOLD_TOLERANCE_FLOOR: float = Field(default=0.005, gt=0, description="Smallest bracket width accepted")
    BASELINE_OFFSET: float = Field(default=0.05, gt=0, lt=1, description="Distance below the guess of the subcritical baseline")
    NOISE_FLOOR_SIGMAS: float = Field(default=5.0, gt=0, description="Baseline standard errors a probe must exceed")

    # Crossing walks and limit checks
    CROSSING_MAX_STEPS: int = Field(default=1_000_000_000, ge=1, description="Step budget of one crossing trial")
    CI_Z: float = Field(default=2.576, gt=0, description="Normal quantile of the reported confidence interval")
    KS_PVALUE_THRESHOLD: float = Field(default=0.001, gt=0, lt=1, description="Two-sample KS acceptance level")
    MIN_FIT_SURVIVORS: int = Field(default=100, ge=1, description="Survivors needed at the end of a ladder fit window")

    # Series oracle
    ORACLE_TERMS: int = Field(default=20_000, ge=10, description="Partial-sum terms of the counting-series oracle")
    ORACLE_DPS: int = Field(default=30, ge=15, description="mpmath precision of the oracle partial sums")

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "allow"  # Allow extra fields from .env


def validate_settings():
    """Validate critical settings"""
    settings = Settings()

    if not isinstance(logging.getLevelName(settings.LOG_LEVEL.upper()), int):
        raise ValueError(f"LOG_LEVEL must be a logging level name, got {settings.LOG_LEVEL}")

    if settings.TAIL_EXACT_LIMIT >= settings.TAIL_TABLE_MAX_SIZE:
        raise ValueError("TAIL_EXACT_LIMIT must be smaller than TAIL_TABLE_MAX_SIZE")

    if settings.ESCAPE_HEIGHT > settings.SITE_MAX_STEPS:
        logger.warning("⚠️  ESCAPE_HEIGHT exceeds SITE_MAX_STEPS: supercritical trials will be censored")

    logger.info("✅ Settings validation passed")
    return settings


# Global settings instance
settings = Settings()
