"""
Crossing kernels and the percolation thresholds they run at
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Optional, Tuple

from core.exceptions import DomainError
from models.map_model import MapKind, MapModel


class KernelKind(str, Enum):
    BOND = "bond"
    FACE = "face"
    SITE = "site"


class WalkComponent(str, Enum):
    """Which coordinate of the exploration a limit check follows"""
    FREE = "free"    # F_n, the free segment
    BLACK = "black"  # B_n, the finite black segment


CRITICAL_PROBABILITIES: Dict[Tuple[KernelKind, MapKind], Fraction] = {
    (KernelKind.BOND, MapKind.TRIANGULATION): Fraction(1, 4),
    (KernelKind.BOND, MapKind.QUADRANGULATION): Fraction(1, 3),
    (KernelKind.FACE, MapKind.TRIANGULATION): Fraction(4, 5),
    (KernelKind.FACE, MapKind.QUADRANGULATION): Fraction(3, 4),
    (KernelKind.SITE, MapKind.TRIANGULATION): Fraction(1, 2),
    (KernelKind.SITE, MapKind.QUADRANGULATION): Fraction(5, 9),
}


@dataclass(frozen=True)
class CrossingKernel:
    kind: KernelKind
    model: MapModel
    p_critical: Fraction
    p: Optional[float] = None

    def __post_init__(self):
        expected = CRITICAL_PROBABILITIES[(self.kind, self.model.kind)]
        if self.p_critical != expected:
            raise DomainError(
                f"{self.kind.value} threshold on {self.model.kind.value} is {expected}, got {self.p_critical}"
            )
        if self.p is not None and not 0 <= self.p <= 1:
            raise DomainError(f"colour probability must lie in [0, 1], got {self.p}")

    @classmethod
    def critical(cls, kind: "KernelKind | str", model: "MapModel | MapKind | str") -> "CrossingKernel":
        kind = KernelKind(kind)
        if not isinstance(model, MapModel):
            model = MapModel.of(model)
        return cls(kind=kind, model=model, p_critical=CRITICAL_PROBABILITIES[(kind, model.kind)])

    def with_probability(self, p: float) -> "CrossingKernel":
        """Same kernel run off criticality."""
        return CrossingKernel(self.kind, self.model, self.p_critical, p)

    @property
    def probability(self) -> float:
        return float(self.p_critical) if self.p is None else self.p

    @property
    def has_free_segment(self) -> bool:
        return self.kind is not KernelKind.FACE

    @property
    def label(self) -> str:
        return f"{self.kind.value}-{self.model.kind.value}"

    def default_component(self) -> WalkComponent:
        return WalkComponent.FREE if self.has_free_segment else WalkComponent.BLACK
