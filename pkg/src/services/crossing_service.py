"""
Crossing experiments at criticality.

Each kernel explores the "white-black-white-black" boundary condition from the
left end of the black segment of length ``floor(lambda a)``. The exploration
is summarized by the chain ``(B_n, F_n)``: ``B_n`` is the length of the finite
black segment still on the boundary and ``F_n`` the length of the free segment
whose colours have not been revealed yet. It stops the first time ``B`` is
non-positive, and the overshoot ``|B_T|`` is compared with ``floor(lambda b)``.

The crossing probability is estimated by the frequency of ``|B_T| > floor(lambda b)``,
which shares its large-lambda limit with the crossing event itself.
"""
import logging
import math
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple

from core.config import settings
from core.exceptions import CensoredTrialError, ContractViolation, DomainError
from models.kernel import CrossingKernel, KernelKind
from models.map_model import MapModel
from models.peel_event import PeelEvent
from models.peeling_law import PeelingLaw
from models.walk import CrossingCase, StoppedOutcome, WalkState
from schemas.estimates import CouplingReport, CrossingEstimate
from services.enumeration_service import peeling_law
from services.peeling_service import sample_peel_event, sample_vertex_peeling
from utils.parallel import SERIAL, TrialRunner
from utils.rng import RngStream, stream_ids

logger = logging.getLogger(__name__)

CROSSING_NAMESPACE = 3
COUPLING_NAMESPACE = 4
AUXILIARY_NAMESPACE = 5

Step = Callable[[WalkState, CrossingKernel, PeelingLaw, RngStream], WalkState]


def _require_running(state: WalkState) -> None:
    if state.stopped:
        raise ContractViolation(f"cannot step a stopped walk (B={state.black_len})")


def bond_step(state: WalkState, kernel: CrossingKernel, law: PeelingLaw, rng: RngStream) -> WalkState:
    """
    Reveal the colour of the rightmost free edge, or peel along it.

    With an empty free segment the step is a forced peel. The free and black
    updates use the same peeling event.
    """
    _require_running(state)
    free = state.free_len
    if free == 0:
        state.free_zeros += 1
    if free > 0 and rng.bernoulli(kernel.probability):
        state.free_len = free - 1
        state.black_len += 1
        state.last_event = None
    else:
        event = sample_peel_event(law, rng)
        state.free_len = event.exposed + max(0, free - event.swallowed_left - 1)
        state.black_len -= event.swallowed_right
        state.last_event = event
    state.step_index += 1
    return state


def face_step(state: WalkState, kernel: CrossingKernel, law: PeelingLaw, rng: RngStream) -> WalkState:
    """Reveal the face incident to the leftmost black edge together with its colour."""
    _require_running(state)
    event = sample_peel_event(law, rng)
    black = rng.bernoulli(kernel.probability)
    state.black_len += (event.exposed if black else 0) - event.swallowed_right - 1
    state.last_event = event
    state.step_index += 1
    return state


def _peel_vertex(free: int, law: PeelingLaw, rng: RngStream) -> Tuple[int, int]:
    # Clamping happens inside the loop, one peeling step at a time
    outcome = sample_vertex_peeling(law, rng)
    current = max(0, free - 1)
    for exposed, swallowed_left in outcome.left_history:
        if current - swallowed_left - 1 >= 0:
            current += exposed - swallowed_left - 1
        else:
            current = exposed - 1
    return current, outcome.right_swallowed


def site_step(state: WalkState, kernel: CrossingKernel, law: PeelingLaw, rng: RngStream) -> WalkState:
    """
    Reveal the colour of the rightmost free vertex; a white vertex is removed
    from the boundary by the vertex-peeling process.
    """
    _require_running(state)
    free = state.free_len
    if free == 0:
        state.free_zeros += 1
    if free > 0 and rng.bernoulli(kernel.probability):
        state.free_len = free - 1
        state.black_len += 1
    else:
        state.free_len, swallowed = _peel_vertex(free, law, rng)
        state.black_len += 1 - swallowed
    state.last_event = None
    state.step_index += 1
    return state


STEPS: Dict[KernelKind, Step] = {
    KernelKind.BOND: bond_step,
    KernelKind.FACE: face_step,
    KernelKind.SITE: site_step,
}


def unconstrained_increment(kernel: CrossingKernel, law: PeelingLaw, rng: RngStream) -> Tuple[int, int]:
    """
    One step of the walk with no clamping and no forced peel.

    Returns ``(free increment, black increment)``; the free increment is 0 for
    the face kernel. Both have mean zero at the critical probability.
    """
    if kernel.kind is KernelKind.FACE:
        event = sample_peel_event(law, rng)
        black = rng.bernoulli(kernel.probability)
        return 0, (event.exposed if black else 0) - event.swallowed_right - 1
    if rng.bernoulli(kernel.probability):
        return -1, 1
    if kernel.kind is KernelKind.BOND:
        event = sample_peel_event(law, rng)
        return event.exposed - event.swallowed_left - 1, -event.swallowed_right
    outcome = sample_vertex_peeling(law, rng)
    free = -1 + sum(exposed - left - 1 for exposed, left in outcome.left_history)
    return free, 1 - outcome.right_swallowed


def classify(overshoot: int, threshold: int) -> CrossingCase:
    """Tie at zero takes precedence over the tie at ``floor(lambda b)``."""
    if overshoot == 0:
        return CrossingCase.TIE_ZERO
    if overshoot == threshold:
        return CrossingCase.TIE_B
    return CrossingCase.CASE1 if overshoot < threshold else CrossingCase.CASE2


def residual_segments(
    B_before: int,
    overshoot: int,
    threshold: int,
    k1: Optional[int],
    k2: Optional[int],
) -> Tuple[int, int]:
    """
    Lengths ``(d_l, d_r)`` of the black segments left on the boundary in Case 2.

    Without four-on-boundary data both distances count as infinite.
    """
    K1 = math.inf if k1 is None else k1
    K2 = math.inf if k2 is None else k2
    d_l = d_r = 0
    if K1 > B_before + threshold:
        d_l = B_before
    elif K1 < B_before:
        d_l = B_before - K1
    if K2 > overshoot:
        d_r = overshoot - threshold
    elif K2 < overshoot - threshold:
        d_r = overshoot - threshold - K2
    return int(d_l), int(d_r)


def _four_right(event: Optional[PeelEvent]) -> bool:
    return event is not None and event.encloses_two_segments_right


def scaled_lengths(lam: float, a: float, b: float) -> Tuple[int, int]:
    """
    ``(floor(lambda a), floor(lambda b))``.

    Raises:
        DomainError: If lambda < 1, a or b is not positive, or the initial
            black segment is empty
    """
    if lam < 1:
        raise DomainError(f"lambda must be at least 1, got {lam}")
    if a <= 0 or b <= 0:
        raise DomainError(f"a and b must be positive, got a={a}, b={b}")
    start = math.floor(lam * a)
    if start < 1:
        raise DomainError(f"floor(lambda * a) = {start}; the black segment must be non-empty")
    return start, math.floor(lam * b)


def run_crossing_trial(
    kernel: CrossingKernel,
    lam: float,
    a: float,
    b: float,
    rng: RngStream,
    max_steps: Optional[int] = None,
) -> StoppedOutcome:
    """
    Run one exploration from ``B_0 = floor(lambda a)``, ``F_0 = 0`` until ``B <= 0``.

    Four-on-boundary data ``(k1, k2)`` is recorded when the bond walk stops on
    a quadrangle enclosing both of its segments on the black side; then
    ``k1 + k2 = B_before + overshoot``.

    Raises:
        DomainError: On invalid lambda, a or b
        CensoredTrialError: If the walk has not stopped after ``max_steps``
    """
    start, threshold = scaled_lengths(lam, a, b)
    max_steps = max_steps or settings.CROSSING_MAX_STEPS
    step = STEPS[kernel.kind]
    law = peeling_law(kernel.model)
    state = WalkState(black_len=start)
    before = start
    while not state.stopped:
        if state.step_index >= max_steps:
            raise CensoredTrialError(
                f"{kernel.label} walk from B={start} still running after {max_steps} steps", steps=max_steps
            )
        before = state.black_len
        step(state, kernel, law, rng)

    overshoot = -state.black_len
    case = classify(overshoot, threshold)
    k1 = k2 = None
    if kernel.kind is KernelKind.BOND and _four_right(state.last_event):
        k1, k2 = state.last_event.k1, state.last_event.k2
    d_l = d_r = None
    if case is CrossingCase.CASE2:
        d_l, d_r = residual_segments(before, overshoot, threshold, k1, k2)
    return StoppedOutcome(T=state.step_index, B_before=before, overshoot=overshoot, case=case,
                          k1=k1, k2=k2, d_l=d_l, d_r=d_r)


def crossing_formula(a: float, b: float) -> float:
    """Limit crossing probability ``arccos((b - a) / (a + b)) / pi``."""
    from services.stable_limit_service import overshoot_law

    return overshoot_law(a, b)


def _crossing_trial_task(
    stream_id: int,
    kind: str,
    model: str,
    p: Optional[float],
    lam: float,
    a: float,
    b: float,
    seed: int,
    max_steps: int,
) -> Optional[StoppedOutcome]:
    kernel = CrossingKernel.critical(kind, model)
    if p is not None:
        kernel = kernel.with_probability(p)
    try:
        return run_crossing_trial(kernel, lam, a, b, RngStream(seed, stream_id), max_steps)
    except CensoredTrialError:
        return None


def crossing_outcomes(
    kernel: CrossingKernel,
    lam: float,
    a: float,
    n_trials: int,
    rng: RngStream,
    b: Optional[float] = None,
    runner: TrialRunner = SERIAL,
    max_steps: Optional[int] = None,
) -> List[Optional[StoppedOutcome]]:
    """
    Stopped outcomes of ``n_trials`` explorations, ``None`` for censored ones.

    Trial ``i`` runs on substream ``(CROSSING_NAMESPACE, i)`` of ``rng``
    whatever the worker count. ``b`` only affects the recorded case; it
    defaults to ``a``.
    """
    b = a if b is None else b
    scaled_lengths(lam, a, b)
    ids = stream_ids(rng.stream_id, CROSSING_NAMESPACE, n_trials)
    task = partial(_crossing_trial_task, kind=kernel.kind.value, model=kernel.model.kind.value, p=kernel.p,
                   lam=lam, a=a, b=b, seed=rng.seed, max_steps=max_steps or settings.CROSSING_MAX_STEPS)
    return runner.map(task, ids)


def outcome_steps(outcomes: List[Optional[StoppedOutcome]], max_steps: Optional[int] = None) -> int:
    """Steps over a batch; a censored trial ran the whole budget."""
    budget = max_steps or settings.CROSSING_MAX_STEPS
    return sum(budget if o is None else o.T for o in outcomes)


def summarize_crossing(
    kernel: CrossingKernel,
    lam: float,
    a: float,
    b: float,
    outcomes: List[Optional[StoppedOutcome]],
    max_steps: Optional[int] = None,
) -> CrossingEstimate:
    """Case table and limit-rule estimate from a batch of outcomes."""
    n = len(outcomes)
    counts = {case.value: 0 for case in CrossingCase}
    for outcome in outcomes:
        counts[(outcome.case if outcome is not None else CrossingCase.CENSORED).value] += 1
    case2 = counts[CrossingCase.CASE2.value]
    censored = counts[CrossingCase.CENSORED.value]
    ties = counts[CrossingCase.TIE_ZERO.value] + counts[CrossingCase.TIE_B.value]
    p_hat = case2 / n
    if censored:
        logger.warning(f"⚠️ {censored}/{n} {kernel.label} trials censored at lambda={lam}; "
                       f"p_hat is bracketed by [{p_hat:.4f}, {(case2 + censored) / n:.4f}]")
    return CrossingEstimate(
        kernel=kernel.kind.value,
        model=kernel.model.kind.value,
        lambda_=lam,
        a=a,
        b=b,
        n_trials=n,
        p_hat=p_hat,
        p_hat_upper=(case2 + censored) / n,
        tie_rate=ties / n,
        censored_rate=censored / n,
        ci_halfwidth=settings.CI_Z * math.sqrt(p_hat * (1 - p_hat) / n),
        analytic=crossing_formula(a, b),
        case_counts=counts,
        total_steps=outcome_steps(outcomes, max_steps),
    )


def estimate_crossing(
    kernel: CrossingKernel,
    lam: float,
    a: float,
    b: float,
    n_trials: int,
    rng: RngStream,
    runner: TrialRunner = SERIAL,
    max_steps: Optional[int] = None,
) -> CrossingEstimate:
    """
    Estimate the crossing probability by the frequency of Case 2.

    Ties and censored trials are counted apart and never folded into ``p_hat``.

    Raises:
        DomainError: If ``n_trials < 100`` or lambda, a, b are invalid
    """
    if n_trials < 100:
        raise DomainError(f"n_trials must be at least 100, got {n_trials}")
    logger.info(f"🚀 Crossing {kernel.label}: lambda={lam}, a={a}, b={b}, {n_trials} trials")
    outcomes = crossing_outcomes(kernel, lam, a, n_trials, rng, b=b, runner=runner, max_steps=max_steps)
    estimate = summarize_crossing(kernel, lam, a, b, outcomes, max_steps)
    logger.info(f"✅ Crossing {kernel.label}: p_hat={estimate.p_hat:.4f} ± {estimate.ci_halfwidth:.4f}, "
                f"analytic={estimate.analytic:.4f}, ties={estimate.tie_rate:.4f}")
    return estimate


def run_coupled_bond_trial(
    kernel: CrossingKernel,
    law: PeelingLaw,
    lam: float,
    a: float,
    rng: RngStream,
    max_steps: Optional[int] = None,
) -> CouplingReport:
    """
    Co-simulate the bond walk with its dominating walk ``S`` and correction ``R``.

    ``S`` follows ``B`` except on steps taken with an empty free segment, where
    an auxiliary Bernoulli(p) from a separate substream makes it step +1 instead.
    ``R`` accumulates ``1 - (B_{n+1} - B_n)`` over those steps. Every step must
    satisfy ``S - R <= B <= S``. A walk still running after ``max_steps``
    is reported as censored, its steps checked all the same.

    Raises:
        ContractViolation: On the first step breaking the sandwich
    """
    if kernel.kind is not KernelKind.BOND:
        raise DomainError(f"the coupling is defined for the bond kernel, got {kernel.kind.value}")
    start, _ = scaled_lengths(lam, a, a)
    max_steps = max_steps or settings.CROSSING_MAX_STEPS
    auxiliary = rng.substream(AUXILIARY_NAMESPACE)
    state = WalkState(black_len=start)
    dominating, correction, max_gap = start, 0, 0
    while not state.stopped and state.step_index < max_steps:
        forced = state.free_len == 0
        before = state.black_len
        bond_step(state, kernel, law, rng)
        increment = state.black_len - before
        if forced:
            dominating += 1 if auxiliary.bernoulli(kernel.probability) else increment
            correction += 1 - increment
        else:
            dominating += increment
        if not dominating - correction <= state.black_len <= dominating:
            raise ContractViolation(
                f"sandwich broken at step {state.step_index}: S={dominating}, R={correction}, B={state.black_len}"
            )
        max_gap = max(max_gap, dominating - state.black_len)
    return CouplingReport(trials=1, steps_checked=state.step_index, violations=0,
                          censored=0 if state.stopped else 1, max_gap=max_gap)


def _coupled_trial_task(stream_id: int, model: str, lam: float, a: float, seed: int, max_steps: int) -> CouplingReport:
    kernel = CrossingKernel.critical(KernelKind.BOND, model)
    return run_coupled_bond_trial(kernel, peeling_law(kernel.model), lam, a, RngStream(seed, stream_id), max_steps)


def coupling_check(
    model: MapModel,
    lam: float,
    a: float,
    trials: int,
    rng: RngStream,
    runner: TrialRunner = SERIAL,
    max_steps: Optional[int] = None,
) -> CouplingReport:
    """Run ``trials`` coupled bond walks and merge their reports."""
    ids = stream_ids(rng.stream_id, COUPLING_NAMESPACE, trials)
    task = partial(_coupled_trial_task, model=model.kind.value, lam=lam, a=a, seed=rng.seed,
                   max_steps=max_steps or settings.CROSSING_MAX_STEPS)
    reports = runner.map(task, ids)
    merged = CouplingReport(
        trials=len(reports),
        steps_checked=sum(r.steps_checked for r in reports),
        violations=0,
        censored=sum(r.censored for r in reports),
        max_gap=max((r.max_gap for r in reports), default=0),
    )
    logger.info(f"✅ Coupling sandwich held on {merged.steps_checked} steps of {merged.trials} bond trials")
    return merged
