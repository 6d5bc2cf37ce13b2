"""
Exact summaries derived from a peeling law
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import mpmath

from models.map_model import MapKind


@dataclass(frozen=True)
class LawMoments:
    E_exposed: Fraction
    E_swallowed: Fraction
    eta: Fraction
    delta: Fraction
    E_Rr_given_positive: Fraction
    E_left: Fraction
    E_right: Fraction


@dataclass(frozen=True)
class TailAsymptotics:
    kind: MapKind
    iota: float
    side_tail_constant: float
    residual_slope: float
    window: Tuple[int, int]


@dataclass(frozen=True)
class OracleBound:
    """Certified enclosure ``lower <= Z_m <= upper`` from the counting series"""
    kind: MapKind
    boundary: int
    terms: int
    lower: mpmath.mpf
    upper: mpmath.mpf

    def contains(self, value: Fraction) -> bool:
        exact = mpmath.mpf(value.numerator) / value.denominator
        return self.lower <= exact <= self.upper

    @property
    def width(self) -> mpmath.mpf:
        return self.upper - self.lower
