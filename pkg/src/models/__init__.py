# Domain models
from .map_model import MapKind, MapModel, QUADRANGULATION, TRIANGULATION
from .peel_event import Orientation, PeelConfig, PeelEvent, VertexPeelOutcome
from .peeling_law import EventFamily, FamilyShape, FamilyTable, PeelingLaw, SizeLaw
from .law_summary import LawMoments, OracleBound, TailAsymptotics
from .site_chain import FreeBoundaryOutcome, FreeBoundaryResult, SiteChainState, SiteOutcome, SiteTrialResult
from .kernel import CRITICAL_PROBABILITIES, CrossingKernel, KernelKind, WalkComponent
from .walk import CrossingCase, StoppedOutcome, WalkState

__all__ = [
    "MapKind", "MapModel", "QUADRANGULATION", "TRIANGULATION",
    "Orientation", "PeelConfig", "PeelEvent", "VertexPeelOutcome",
    "EventFamily", "FamilyShape", "FamilyTable", "PeelingLaw", "SizeLaw",
    "LawMoments", "OracleBound", "TailAsymptotics",
    "FreeBoundaryOutcome", "FreeBoundaryResult", "SiteChainState", "SiteOutcome", "SiteTrialResult",
    "CRITICAL_PROBABILITIES", "CrossingKernel", "KernelKind", "WalkComponent",
    "CrossingCase", "StoppedOutcome", "WalkState",
]
