"""
Outcomes of single peeling steps and of the vertex-peeling process
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple


class PeelConfig(str, Enum):
    INNER_VERTICES = "inner_vertices"
    THIRD_ON_BOUNDARY_LEFT = "third_on_boundary_left"
    THIRD_ON_BOUNDARY_RIGHT = "third_on_boundary_right"
    FOUR_ON_BOUNDARY = "four_on_boundary"


class Orientation(str, Enum):
    """Where the two boundary segments of a four-on-boundary quadrangle sit"""
    LEFT = "left"
    SPLIT = "split"
    RIGHT = "right"


@dataclass(frozen=True, slots=True)
class PeelEvent:
    """One revealed face.

    ``k`` is the boundary distance of a third-vertex event; ``k1``/``k2`` and
    ``orientation`` describe a four-on-boundary quadrangle, ``k1`` being the
    segment nearer to the root edge.
    """
    config: PeelConfig
    exposed: int
    swallowed_left: int = 0
    swallowed_right: int = 0
    k: Optional[int] = None
    k1: Optional[int] = None
    k2: Optional[int] = None
    orientation: Optional[Orientation] = None

    @property
    def encloses_two_segments_right(self) -> bool:
        return self.orientation is Orientation.RIGHT


@dataclass(frozen=True, slots=True)
class VertexPeelOutcome:
    """Result of peeling next to a marked vertex until it leaves the boundary"""
    steps: int
    right_swallowed: int
    left_history: Tuple[Tuple[int, int], ...]
