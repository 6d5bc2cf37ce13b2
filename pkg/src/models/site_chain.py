"""
State and outcomes of the site-percolation absorption chain
"""
from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True, slots=True)
class SiteChainState:
    black_len: int
    step_index: int = 0
    absorbed: bool = False

    @classmethod
    def start(cls, black_len: int = 1) -> "SiteChainState":
        return cls(black_len=black_len, step_index=0, absorbed=black_len == 0)


class SiteOutcome(str, Enum):
    ABSORBED = "absorbed"
    ESCAPED = "escaped"
    CENSORED = "censored"


@dataclass(frozen=True, slots=True)
class SiteTrialResult:
    outcome: SiteOutcome
    steps: int


class FreeBoundaryOutcome(str, Enum):
    NO_PERCOLATION_WITNESS = "no_percolation_witness"
    ESCAPED = "escaped"
    CENSORED = "censored"


@dataclass(frozen=True, slots=True)
class FreeBoundaryResult:
    outcome: FreeBoundaryOutcome
    restarts_used: int
