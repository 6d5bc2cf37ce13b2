"""
State of a crossing exploration and the data recorded when it stops
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from models.peel_event import PeelEvent


@dataclass(slots=True)
class WalkState:
    """
    ``(B_n, F_n)`` of the crossing exploration.

    Steps update the state in place. ``free_zeros`` counts the steps taken
    with an empty free segment and ``last_event`` is the face revealed by the
    latest step, if any.
    """
    black_len: int
    free_len: int = 0
    step_index: int = 0
    free_zeros: int = 0
    last_event: Optional[PeelEvent] = None

    @property
    def stopped(self) -> bool:
        return self.black_len <= 0


class CrossingCase(str, Enum):
    CASE1 = "case1"          # overshoot < floor(lambda b)
    CASE2 = "case2"          # overshoot > floor(lambda b)
    TIE_ZERO = "tie_zero"    # overshoot = 0
    TIE_B = "tie_b"          # overshoot = floor(lambda b)
    CENSORED = "censored"    # only in aggregated case tables


@dataclass(frozen=True, slots=True)
class StoppedOutcome:
    T: int
    B_before: int
    overshoot: int
    case: CrossingCase
    k1: Optional[int] = None
    k2: Optional[int] = None
    d_l: Optional[int] = None
    d_r: Optional[int] = None

    @property
    def has_k_data(self) -> bool:
        return self.k1 is not None
