"""
Site percolation threshold on the half-planar maps.

The black boundary segment adjacent to the origin evolves as
``B_{n+1} = (B_n + 1 - 1{c_n = 0} H_n)_+`` with ``H ~ L(R_r | R_r > 0)``:
each revealed vertex is black with probability p, and a white one is peeled
by the vertex-peeling process, swallowing H boundary edges. The origin's
cluster is infinite exactly when the chain never hits zero.
"""
import logging
import math
from fractions import Fraction
from functools import partial
from typing import List, Optional, Tuple, Union

from core.config import settings
from core.exceptions import ContractViolation, DomainError, InconclusiveResult
from models.map_model import MapModel
from models.peeling_law import PeelingLaw
from models.site_chain import (
    FreeBoundaryOutcome,
    FreeBoundaryResult,
    SiteChainState,
    SiteOutcome,
    SiteTrialResult,
)
from schemas.estimates import ProbeResult, ThresholdBudget, ThresholdEstimate
from services.enumeration_service import law_moments, peeling_law
from services.peeling_service import sample_Rr_conditioned_positive
from utils.parallel import SERIAL, TrialRunner
from utils.rng import RngStream, stream_ids

logger = logging.getLogger(__name__)

SITE_NAMESPACE = 1
FREE_BOUNDARY_NAMESPACE = 2


def _draw_step(p: float, law: PeelingLaw, rng: RngStream) -> Tuple[bool, int]:
    # H is drawn on every step so that chains run at different p share their randomness
    black = rng.uniform() < p
    return black, sample_Rr_conditioned_positive(law, rng)


def step_site_chain(state: SiteChainState, p: float, law: PeelingLaw, rng: RngStream) -> SiteChainState:
    """Advance the chain by one revealed vertex."""
    if state.absorbed:
        raise ContractViolation("cannot step an absorbed site chain")
    black, swallowed = _draw_step(p, law, rng)
    length = state.black_len + 1 if black else max(0, state.black_len + 1 - swallowed)
    return SiteChainState(black_len=length, step_index=state.step_index + 1, absorbed=length == 0)


def site_chain_increment(p: float, law: PeelingLaw, rng: RngStream) -> int:
    """One un-clamped increment of the chain; its mean is 1 - E(R_r | R_r > 0)(1 - p)."""
    black, swallowed = _draw_step(p, law, rng)
    return 1 if black else 1 - swallowed


def run_site_trial(
    p: float,
    law: PeelingLaw,
    rng: RngStream,
    escape_height: int,
    max_steps: int,
    black_len: int = 1,
) -> SiteTrialResult:
    """
    Run the chain from ``black_len`` until absorption, escape above
    ``escape_height`` or ``max_steps`` steps.
    """
    if escape_height < 1 or max_steps < 1:
        raise DomainError("escape_height and max_steps must be at least 1")
    length = black_len
    for step in range(1, max_steps + 1):
        black, swallowed = _draw_step(p, law, rng)
        if black:
            length += 1
            if length > escape_height:
                return SiteTrialResult(SiteOutcome.ESCAPED, step)
        else:
            length += 1 - swallowed
            if length <= 0:
                return SiteTrialResult(SiteOutcome.ABSORBED, step)
    return SiteTrialResult(SiteOutcome.CENSORED, max_steps)


def universal_threshold(eta: Union[Fraction, float], delta: Union[Fraction, float]) -> Fraction:
    """
    Site threshold ``1 - 2 eta / delta`` from the step-law moments.

    Raises:
        DomainError: Unless 0 < 2 eta <= delta
    """
    eta, delta = Fraction(eta), Fraction(delta)
    if not 0 < 2 * eta <= delta:
        raise DomainError(f"need 0 < 2*eta <= delta, got eta={eta}, delta={delta}")
    return 1 - 2 * eta / delta


def run_free_boundary_trial(
    p: float,
    law: PeelingLaw,
    rng: RngStream,
    restarts_cap: int,
    escape_height: int,
    max_steps: int,
) -> FreeBoundaryResult:
    """
    Restart construction for a free boundary condition.

    Each absorption exposes a pivot vertex whose colour is Bernoulli(p): white
    certifies a closed cluster, black starts a fresh chain.
    """
    if restarts_cap < 1:
        raise DomainError("restarts_cap must be at least 1")
    restarts = 0
    while True:
        result = run_site_trial(p, law, rng, escape_height, max_steps)
        if result.outcome is SiteOutcome.ESCAPED:
            return FreeBoundaryResult(FreeBoundaryOutcome.ESCAPED, restarts)
        if result.outcome is SiteOutcome.CENSORED:
            return FreeBoundaryResult(FreeBoundaryOutcome.CENSORED, restarts)
        if not rng.bernoulli(p):
            return FreeBoundaryResult(FreeBoundaryOutcome.NO_PERCOLATION_WITNESS, restarts)
        restarts += 1
        if restarts >= restarts_cap:
            return FreeBoundaryResult(FreeBoundaryOutcome.CENSORED, restarts)


def _site_trial_task(stream_id: int, kind: str, p: float, seed: int, escape_height: int,
                     max_steps: int) -> Tuple[str, int]:
    law = peeling_law(MapModel.of(kind))
    result = run_site_trial(p, law, RngStream(seed, stream_id), escape_height, max_steps)
    return result.outcome.value, result.steps


def estimate_escape_frequency(
    model: MapModel,
    p: float,
    trials: int,
    escape_height: int,
    max_steps: int,
    rng: RngStream,
    runner: TrialRunner = SERIAL,
) -> ProbeResult:
    """
    Escape and censoring frequencies over ``trials`` chains started at 1.

    Trial ``i`` always uses the same substream of ``rng``, so frequencies at
    different p come from common random numbers and are monotone in p.
    """
    if p >= 1:
        return ProbeResult(p=1.0, trials=0, escape_freq=1.0, censored_freq=0.0)
    ids = stream_ids(rng.stream_id, SITE_NAMESPACE, trials)
    task = partial(_site_trial_task, kind=model.kind.value, p=float(p), seed=rng.seed,
                   escape_height=escape_height, max_steps=max_steps)
    results = runner.map(task, ids)
    escaped = sum(1 for o, _ in results if o == SiteOutcome.ESCAPED.value)
    censored = sum(1 for o, _ in results if o == SiteOutcome.CENSORED.value)
    return ProbeResult(p=float(p), trials=trials, escape_freq=escaped / trials, censored_freq=censored / trials,
                       total_steps=sum(steps for _, steps in results))


def default_budget() -> ThresholdBudget:
    return ThresholdBudget(
        trials_per_probe=settings.THRESHOLD_TRIALS_PER_PROBE,
        escape_height=settings.ESCAPE_HEIGHT,
        max_steps=settings.SITE_MAX_STEPS,
        max_probes=settings.THRESHOLD_MAX_PROBES,
    )


def estimate_threshold(
    model: MapModel,
    tolerance: float,
    budget: Optional[ThresholdBudget],
    rng: RngStream,
    runner: TrialRunner = SERIAL,
) -> ThresholdEstimate:
    """
    Bisection on p for the site threshold.

    A probe counts as supercritical when its escape frequency exceeds
    ``NOISE_FLOOR_SIGMAS`` binomial standard errors of a subcritical baseline
    measured ``BASELINE_OFFSET`` below the guess. Censored trials never count
    as escapes. The bracket starts at ``[0, tol * 2^k]`` with ``2^k >= 1/tol``
    so that it ends with width exactly ``tol``; probes at p >= 1 escape by
    definition.

    Raises:
        DomainError: If ``tolerance`` is below the configured floor
        InconclusiveResult: If the probe budget runs out or one side of the
            bracket never moved
    """
    if tolerance < settings.THRESHOLD_TOLERANCE_FLOOR:
        raise DomainError(
            f"tolerance {tolerance} is below the floor {settings.THRESHOLD_TOLERANCE_FLOOR}"
        )
    budget = budget or default_budget()
    law = peeling_law(model)
    moments = law_moments(law)
    formula = float(universal_threshold(moments.eta, moments.delta))

    def probe(p: float) -> ProbeResult:
        return estimate_escape_frequency(model, p, budget.trials_per_probe, budget.escape_height,
                                         budget.max_steps, rng, runner)

    logger.info(f"🚀 Site threshold bisection on {model.kind.value}: tol={tolerance}, "
                f"{budget.trials_per_probe} trials per probe")
    baseline = probe(max(0.0, budget.threshold_guess - settings.BASELINE_OFFSET))
    n = baseline.trials
    floor_freq = max(baseline.escape_freq, 1 / n)
    noise_floor = settings.NOISE_FLOOR_SIGMAS * math.sqrt(floor_freq * (1 - floor_freq) / n)
    logger.info(f"Baseline at p={baseline.p:.4f}: escape={baseline.escape_freq:.4f}, noise floor={noise_floor:.4f}")

    tol = Fraction(str(tolerance))
    doublings = math.ceil(math.log2(1 / tol))
    low, high = Fraction(0), tol * 2**doublings
    probes: List[ProbeResult] = []
    while high - low > tol:
        if len(probes) >= budget.max_probes:
            raise InconclusiveResult(
                f"probe budget of {budget.max_probes} exhausted with bracket [{float(low)}, {float(high)}]",
                partial=probes,
            )
        mid = (low + high) / 2
        result = probe(float(mid))
        supercritical = result.escape_freq > noise_floor
        probes.append(result.model_copy(update={"supercritical": supercritical}))
        logger.info(f"Probe p={float(mid):.4f}: escape={result.escape_freq:.4f} "
                    f"censored={result.censored_freq:.4f} -> {'super' if supercritical else 'sub'}critical")
        if supercritical:
            high = mid
        else:
            low = mid

    if low == 0 or high >= 1:
        raise InconclusiveResult(
            f"bracket [{float(low)}, {float(high)}] never separated from the edge of [0, 1]",
            partial=probes,
        )
    estimate = ThresholdEstimate(
        model=model.kind.value,
        p_low=float(low),
        p_high=float(high),
        tolerance=tolerance,
        trials_per_probe=budget.trials_per_probe,
        escape_height=budget.escape_height,
        max_steps=budget.max_steps,
        baseline=baseline,
        noise_floor=noise_floor,
        probes=probes,
        universal_formula_value=formula,
    )
    if not estimate.contains(formula):
        logger.warning(f"⚠️ Closed-form threshold {formula:.4f} lies outside the bracket "
                       f"[{estimate.p_low:.4f}, {estimate.p_high:.4f}]")
    logger.info(f"✅ Site threshold bracket [{estimate.p_low:.4f}, {estimate.p_high:.4f}], formula {formula:.4f}")
    return estimate


def _free_boundary_task(stream_id: int, kind: str, p: float, seed: int, restarts_cap: int,
                        escape_height: int, max_steps: int) -> Tuple[str, int]:
    law = peeling_law(MapModel.of(kind))
    result = run_free_boundary_trial(p, law, RngStream(seed, stream_id), restarts_cap, escape_height, max_steps)
    return result.outcome.value, result.restarts_used


def free_boundary_trials(
    model: MapModel,
    p: float,
    trials: int,
    rng: RngStream,
    restarts_cap: int,
    escape_height: int,
    max_steps: int,
    runner: TrialRunner = SERIAL,
) -> List[FreeBoundaryResult]:
    ids = stream_ids(rng.stream_id, FREE_BOUNDARY_NAMESPACE, trials)
    task = partial(_free_boundary_task, kind=model.kind.value, p=float(p), seed=rng.seed,
                   restarts_cap=restarts_cap, escape_height=escape_height, max_steps=max_steps)
    return [FreeBoundaryResult(FreeBoundaryOutcome(o), r) for o, r in runner.map(task, ids)]


