"""
Sampling of single peeling events and of the vertex-peeling process.

Every event consumes exactly three uniforms (family, first size, second size)
whatever its configuration, so two simulations sharing a stream stay aligned
draw for draw.
"""
from typing import List, Tuple

from models.peel_event import PeelEvent, VertexPeelOutcome
from models.peeling_law import PeelingLaw
from utils.rng import RngStream


def sample_peel_event(law: PeelingLaw, rng: RngStream) -> PeelEvent:
    """Draw one face reveal from the full q-law."""
    return law.events.draw(rng.uniform(), rng.uniform(), rng.uniform())


def sample_right_zero_event(law: PeelingLaw, rng: RngStream) -> PeelEvent:
    """Draw from the q-law conditioned on no swallowed edge to the right."""
    return law.right_zero.draw(rng.uniform(), rng.uniform(), rng.uniform())


def sample_right_positive_event(law: PeelingLaw, rng: RngStream) -> PeelEvent:
    """Draw from the q-law conditioned on at least one swallowed edge to the right."""
    return law.right_positive.draw(rng.uniform(), rng.uniform(), rng.uniform())


def sample_Rr_conditioned_positive(law: PeelingLaw, rng: RngStream) -> int:
    """Draw from L(R_r | R_r > 0) by inverse transform on the conditioned table."""
    return sample_right_positive_event(law, rng).swallowed_right


def sample_vertex_peeling(law: PeelingLaw, rng: RngStream) -> VertexPeelOutcome:
    """
    Peel next to a marked boundary vertex until it is swallowed.

    The marked vertex sits to the right of the peeled edge. The number of
    steps with nothing swallowed on the right is geometric with success
    probability eta = P(R_r > 0), drawn directly; those steps come from the
    law conditioned on R_r = 0 and the last one from the law conditioned on
    R_r > 0.
    """
    eta = law.right_positive_probability
    failures = rng.geometric_failures(eta)
    history: List[Tuple[int, int]] = []
    for _ in range(failures):
        event = sample_right_zero_event(law, rng)
        history.append((event.exposed, event.swallowed_left))
    last = sample_right_positive_event(law, rng)
    history.append((last.exposed, last.swallowed_left))
    return VertexPeelOutcome(steps=failures + 1, right_swallowed=last.swallowed_right, left_history=tuple(history))


def compose_vertex_peeling(law: PeelingLaw, rng: RngStream) -> VertexPeelOutcome:
    """Same process built from unconditioned events, stopping at the first R_r > 0."""
    history: List[Tuple[int, int]] = []
    while True:
        event = sample_peel_event(law, rng)
        history.append((event.exposed, event.swallowed_left))
        if event.swallowed_right > 0:
            return VertexPeelOutcome(steps=len(history), right_swallowed=event.swallowed_right,
                                     left_history=tuple(history))
