"""
The distribution of one peeling step, organised for exact bookkeeping and sampling.

A law is a list of event families. Each family has an exact mass and, when it
swallows boundary edges, draws one or two segment sizes from a shared
heavy-tailed size law. Families never mix events with and without swallowed
edges on the right, so the laws conditioned on that event are sub-tables.
"""
import bisect
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Tuple

from core.exceptions import DomainError
from models.map_model import MapModel
from models.peel_event import Orientation, PeelConfig, PeelEvent
from utils.heavy_tail import LazyTailTable


@dataclass(frozen=True)
class SizeLaw:
    """Heavy-tailed law of a segment size with closed-form total and first moment"""
    name: str
    term: Callable[[int], Fraction]
    ratio: Callable[[int], Fraction]
    first: int
    total: Fraction
    first_moment: Fraction
    table: LazyTailTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "table", LazyTailTable(self.name, self.term, self.ratio, self.first, self.total)
        )

    @property
    def mean(self) -> Fraction:
        return self.first_moment / self.total

    def probability(self, size: int) -> Fraction:
        if size < self.first:
            return Fraction(0)
        return self.term(size) / self.total

    def truncated(self, first: int) -> "SizeLaw":
        """The same law conditioned on ``size >= first``."""
        head = range(self.first, first)
        return SizeLaw(
            name=f"{self.name}>={first}",
            term=self.term,
            ratio=self.ratio,
            first=first,
            total=self.total - sum((self.term(i) for i in head), Fraction(0)),
            first_moment=self.first_moment - sum((i * self.term(i) for i in head), Fraction(0)),
        )

    def sample(self, v: float) -> int:
        return self.table.sample(v)


class FamilyShape(str, Enum):
    INNER = "inner"
    THIRD = "third"
    FOUR = "four"


@dataclass(frozen=True)
class EventFamily:
    """
    Events sharing one configuration shape.

    A segment drawn with size ``s`` has length ``scale * s - offset``. A family
    without a size law always yields ``fixed_k`` (or no segment at all).
    """
    name: str
    mass: Fraction
    shape: FamilyShape
    exposed: int
    side: Optional[str] = None
    orientation: Optional[Orientation] = None
    sizes: Optional[SizeLaw] = None
    scale: int = 1
    offset: int = 0
    fixed_k: Optional[int] = None
    template: Optional[PeelEvent] = field(default=None, init=False, compare=False)

    def __post_init__(self):
        if self.shape is FamilyShape.INNER:
            object.__setattr__(self, "template", PeelEvent(PeelConfig.INNER_VERTICES, self.exposed))
        elif self.sizes is None:
            if self.fixed_k is None:
                raise DomainError(f"{self.name}: a boundary family needs sizes or a fixed distance")
            object.__setattr__(self, "template", self._assemble(self.fixed_k, None))

    @property
    def mean_segment(self) -> Fraction:
        if self.sizes is None:
            return Fraction(self.fixed_k or 0)
        return self.scale * self.sizes.mean - self.offset

    @property
    def min_segment(self) -> int:
        if self.sizes is None:
            return self.fixed_k or 0
        return self.scale * self.sizes.first - self.offset

    def mean_swallowed(self, side: str) -> Fraction:
        """Exact E(swallowed edges on ``side`` | this family)."""
        if self.shape is FamilyShape.INNER:
            return Fraction(0)
        if self.shape is FamilyShape.THIRD:
            return self.mean_segment if self.side == side else Fraction(0)
        if self.orientation is Orientation.SPLIT:
            return self.mean_segment
        own = Orientation.LEFT if side == "left" else Orientation.RIGHT
        return 2 * self.mean_segment if self.orientation is own else Fraction(0)

    @property
    def swallows_right(self) -> bool:
        if self.shape is FamilyShape.INNER:
            return False
        if self.shape is FamilyShape.THIRD:
            return self.side == "right" and self.min_segment > 0
        return self.orientation is not Orientation.LEFT

    def segments(self, max_length: int) -> Iterable[Tuple[int, Fraction]]:
        """Exact (segment length, conditional probability) pairs up to ``max_length``."""
        if self.sizes is None:
            yield self.min_segment, Fraction(1)
            return
        size = self.sizes.first
        while self.scale * size - self.offset <= max_length:
            yield self.scale * size - self.offset, self.sizes.probability(size)
            size += 1

    def build(self, u1: float, u2: float) -> PeelEvent:
        if self.template is not None:
            return self.template
        k1 = self.scale * self.sizes.sample(1.0 - u1) - self.offset
        if self.shape is FamilyShape.THIRD:
            return self._assemble(k1, None)
        k2 = self.scale * self.sizes.sample(1.0 - u2) - self.offset
        return self._assemble(k1, k2)

    def _assemble(self, k1: int, k2: Optional[int]) -> PeelEvent:
        if self.shape is FamilyShape.THIRD:
            if self.side == "left":
                return PeelEvent(PeelConfig.THIRD_ON_BOUNDARY_LEFT, self.exposed, swallowed_left=k1, k=k1)
            return PeelEvent(PeelConfig.THIRD_ON_BOUNDARY_RIGHT, self.exposed, swallowed_right=k1, k=k1)
        if self.orientation is Orientation.LEFT:
            left, right = k1 + k2, 0
        elif self.orientation is Orientation.SPLIT:
            left, right = k1, k2
        else:
            left, right = 0, k1 + k2
        return PeelEvent(
            PeelConfig.FOUR_ON_BOUNDARY, self.exposed,
            swallowed_left=left, swallowed_right=right,
            k1=k1, k2=k2, orientation=self.orientation,
        )


class FamilyTable:
    """Inverse-transform selection among families, renormalized to their total mass"""

    def __init__(self, families: Iterable[EventFamily]):
        self.families: Tuple[EventFamily, ...] = tuple(families)
        if not self.families:
            raise DomainError("a family table needs at least one family")
        self.total = sum((f.mass for f in self.families), Fraction(0))
        running = Fraction(0)
        cumulative: List[float] = []
        for family in self.families:
            running += family.mass
            cumulative.append(float(running / self.total))
        cumulative[-1] = 1.0
        self._cumulative = cumulative

    def draw(self, u0: float, u1: float, u2: float) -> PeelEvent:
        family = self.families[bisect.bisect_right(self._cumulative, u0)]
        return family.build(u1, u2)


@dataclass
class PeelingLaw:
    """
    Exact q-law of one peeling step.

    ``q_side(k)`` is the probability of the third-vertex-on-boundary event at
    distance ``k`` on one fixed side; ``q_joint(k1, k2)`` is the
    four-on-boundary probability for one fixed orientation, and
    ``joint_orientations`` counts the orientations (left, split, right) that
    share it. Entries are tabulated lazily by doubling.
    """
    model: MapModel
    q_inner: Fraction
    side_term: Callable[[int], Fraction]
    side_first: int
    side_mass: Fraction
    joint_mass: Fraction
    joint_term: Optional[Callable[[int, int], Fraction]]
    joint_orientations: int
    families: Tuple[EventFamily, ...]
    _side_table: List[Fraction] = field(default_factory=list, repr=False)
    _side_lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        self.events = FamilyTable(self.families)
        self.right_zero = FamilyTable(f for f in self.families if not f.swallows_right)
        self.right_positive = FamilyTable(f for f in self.families if f.swallows_right)
        self.right_positive_probability = float(self.right_positive.total)

    def q_side(self, k: int) -> Fraction:
        if k < self.side_first:
            raise DomainError(f"q_side is defined for k >= {self.side_first}, got {k}")
        offset = k - self.side_first
        if offset >= len(self._side_table):
            with self._side_lock:
                if offset >= len(self._side_table):
                    size = max(2 * len(self._side_table), offset + 1, 16)
                    self._side_table.extend(
                        self.side_term(self.side_first + i) for i in range(len(self._side_table), size)
                    )
        return self._side_table[offset]

    def q_joint(self, k1: int, k2: int) -> Fraction:
        if self.joint_term is None:
            raise DomainError(f"{self.model.kind.value} has no four-on-boundary events")
        if k1 < 1 or k2 < 1 or k1 % 2 == 0 or k2 % 2 == 0:
            raise DomainError(f"four-on-boundary segments are odd and positive, got ({k1}, {k2})")
        return self.joint_term(k1, k2)

    def side_tail_mass(self, k_max: int) -> Fraction:
        """Closed-form side mass strictly beyond ``k_max``."""
        head = sum((self.q_side(k) for k in range(self.side_first, k_max + 1)), Fraction(0))
        return self.side_mass - head

    def normalization(self) -> Fraction:
        return self.q_inner + 2 * self.side_mass + self.joint_orientations * self.joint_mass

    def realized_mass(self, k_max: int) -> Fraction:
        """Mass of every tabulated entry with all segment lengths at most ``k_max``."""
        side = sum((self.q_side(k) for k in range(self.side_first, k_max + 1)), Fraction(0))
        joint = Fraction(0)
        if self.joint_term is not None:
            odd = range(1, k_max + 1, 2)
            joint = sum((self.q_joint(a, b) for a in odd for b in odd), Fraction(0))
        return self.q_inner + 2 * side + self.joint_orientations * joint
