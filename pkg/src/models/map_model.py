"""
Half-planar map ensembles and their constants
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from core.exceptions import DomainError


class MapKind(str, Enum):
    TRIANGULATION = "tri"
    QUADRANGULATION = "quad"


@dataclass(frozen=True)
class MapModel:
    """One half-planar ensemble.

    ``alpha_sq`` holds the square of the boundary growth constant so that the
    quadrangulation value sqrt(54) stays rational.
    """
    kind: MapKind
    rho: Fraction
    alpha_sq: Fraction

    def __post_init__(self):
        expected = _CONSTANTS[self.kind]
        if (self.rho, self.alpha_sq) != expected:
            raise DomainError(f"Constants of {self.kind.value} must be rho={expected[0]}, alpha^2={expected[1]}")

    @classmethod
    def of(cls, kind: "MapKind | str") -> "MapModel":
        kind = MapKind(kind)
        rho, alpha_sq = _CONSTANTS[kind]
        return cls(kind=kind, rho=rho, alpha_sq=alpha_sq)

    @property
    def is_quadrangulation(self) -> bool:
        return self.kind is MapKind.QUADRANGULATION

    @property
    def face_degree(self) -> int:
        return 4 if self.is_quadrangulation else 3

    @property
    def iota_per_side_constant(self) -> Fraction:
        # q_side(k) * k^{5/2} -> C implies Z_m * m^{5/2} * alpha^{-m} -> C * factor
        return Fraction(2, 9) if self.is_quadrangulation else Fraction(1, 9)


_CONSTANTS = {
    MapKind.TRIANGULATION: (Fraction(27, 2), Fraction(81)),
    MapKind.QUADRANGULATION: (Fraction(12), Fraction(54)),
}

TRIANGULATION = MapModel.of(MapKind.TRIANGULATION)
QUADRANGULATION = MapModel.of(MapKind.QUADRANGULATION)
