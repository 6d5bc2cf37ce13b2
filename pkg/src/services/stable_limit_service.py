"""
Checks that the crossing walks behave like the spectrally negative
3/2-stable process in the limit.

Nothing here samples the stable process itself and no check needs its scale
constant: every comparison is between two simulated samples, a frequency
and its exact limit, or an exponent.
"""
import logging
import math
from fractions import Fraction
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import stats

from core.config import settings
from core.exceptions import DomainError, InconclusiveResult
from models.kernel import CrossingKernel, KernelKind, WalkComponent
from models.peeling_law import EventFamily, FamilyShape, PeelingLaw
from models.peel_event import Orientation
from models.walk import WalkState
from schemas.estimates import ExponentFit, OvershootCheck, PositivityReport, ScalingCheckReport, XiGrowthReport
from services.crossing_service import STEPS, crossing_outcomes, outcome_steps, scaled_lengths, unconstrained_increment
from services.enumeration_service import peeling_law
from utils.parallel import SERIAL, TrialRunner
from utils.rng import RngStream, derive_stream_id, stream_ids

logger = logging.getLogger(__name__)

POSITIVITY_NAMESPACE = 6
LADDER_NAMESPACE = 7
SELFSIM_NAMESPACE = 8
XI_NAMESPACE = 9

POSITIVITY_PARAMETER = 2 / 3
XI_EXPONENT = 0.4
XI_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)
FIT_POINTS = 24
# Bound on B for runs that only follow the free segment
_UNREACHABLE = 2**62


def overshoot_law(a: float, b: float) -> float:
    """
    ``P_a(|S_tau| > b) = arccos((b - a) / (a + b)) / pi`` for the process
    started at ``a`` and stopped on entering the negative half-line.

    Raises:
        DomainError: If a or b is not positive
    """
    if a <= 0 or b <= 0:
        raise DomainError(f"a and b must be positive, got a={a}, b={b}")
    return math.acos((b - a) / (a + b)) / math.pi


def _component_index(kernel: CrossingKernel, component: Optional[WalkComponent]) -> int:
    component = WalkComponent(component) if component is not None else kernel.default_component()
    if component is WalkComponent.FREE and not kernel.has_free_segment:
        raise DomainError("the face kernel has no free segment")
    return 0 if component is WalkComponent.FREE else 1


def _kernel(kind: str, model: str, p: Optional[float]) -> CrossingKernel:
    kernel = CrossingKernel.critical(kind, model)
    return kernel if p is None else kernel.with_probability(p)


def _walk_task(stream_id: int, kind: str, model: str, p: Optional[float], index: int, steps: int, seed: int) -> int:
    kernel = _kernel(kind, model, p)
    law = peeling_law(kernel.model)
    rng = RngStream(seed, stream_id)
    position = 0
    for _ in range(steps):
        position += unconstrained_increment(kernel, law, rng)[index]
    return position


def _walk_endpoints(
    kernel: CrossingKernel,
    component: Optional[WalkComponent],
    steps: int,
    ids: List[int],
    seed: int,
    runner: TrialRunner,
) -> List[int]:
    task = partial(_walk_task, kind=kernel.kind.value, model=kernel.model.kind.value, p=kernel.p,
                   index=_component_index(kernel, component), steps=steps, seed=seed)
    return runner.map(task, ids)


def positivity_check(
    kernel: CrossingKernel,
    n: int,
    trials: int,
    rng: RngStream,
    component: Optional[WalkComponent] = None,
    runner: TrialRunner = SERIAL,
) -> PositivityReport:
    """
    Frequency of ``S_n > 0`` for the unconstrained walk started at 0.

    The free-segment walk is followed for the bond and site kernels and the
    black-segment walk for the face kernel unless ``component`` says otherwise.
    The limit is the positivity parameter 2/3; at ``n = 1`` the frequency
    estimates ``single_step_positivity``.
    """
    if n < 1 or trials < 1:
        raise DomainError(f"need n >= 1 and trials >= 1, got n={n}, trials={trials}")
    ids = stream_ids(rng.stream_id, POSITIVITY_NAMESPACE, trials)
    endpoints = _walk_endpoints(kernel, component, n, ids, rng.seed, runner)
    frequency = sum(1 for s in endpoints if s > 0) / trials
    report = PositivityReport(
        horizon=n,
        trials=trials,
        frequency=frequency,
        stderr=math.sqrt(frequency * (1 - frequency) / trials),
        expected=POSITIVITY_PARAMETER,
        total_steps=n * trials,
    )
    logger.info(f"✅ Positivity of {kernel.label} at n={n}: {report.frequency:.4f} ± {report.stderr:.4f}")
    return report


def _positive_step_probability(family: EventFamily, side: str, threshold: int) -> Fraction:
    """P(swallowed edges on ``side`` <= threshold | family)."""
    if threshold < 0:
        return Fraction(0)
    if family.shape is FamilyShape.INNER:
        return Fraction(1)
    if family.shape is FamilyShape.THIRD:
        if family.side != side:
            return Fraction(1)
        return sum((prob for _, prob in family.segments(threshold)), Fraction(0))
    own = Orientation.LEFT if side == "left" else Orientation.RIGHT
    if family.orientation is Orientation.SPLIT:
        return sum((prob for _, prob in family.segments(threshold)), Fraction(0))
    if family.orientation is not own:
        return Fraction(1)
    pairs = list(family.segments(threshold))
    return sum((pa * pb for a, pa in pairs for b, pb in pairs if a + b <= threshold), Fraction(0))


def single_step_positivity(
    kernel: CrossingKernel,
    component: Optional[WalkComponent],
    law: Optional[PeelingLaw] = None,
) -> Fraction:
    """
    Exact ``P(X > 0)`` for one unconstrained step.

    Bond free segment: ``c = 0`` and ``E - R_l >= 2``. Face black segment:
    ``c = 1`` and ``E - R_r >= 2``. The black-segment step of the bond and
    site kernels is positive exactly when the revealed colour is black.

    Raises:
        DomainError: For the free-segment step of the site kernel, whose
            composite law has no finite family decomposition
    """
    law = law or peeling_law(kernel.model)
    p = kernel.p if kernel.p is not None else kernel.p_critical
    p = Fraction(p)
    index = _component_index(kernel, component)
    if index == 1 and kernel.kind is not KernelKind.FACE:
        return p
    if kernel.kind is KernelKind.SITE:
        raise DomainError("single-step positivity of the site free walk is not available in closed form")
    side, colour = ("left", 1 - p) if kernel.kind is KernelKind.BOND else ("right", p)
    mass = sum(
        (family.mass * _positive_step_probability(family, side, family.exposed - 2) for family in law.families),
        Fraction(0),
    )
    return colour * mass


def _ladder_task(stream_id: int, kind: str, model: str, p: Optional[float], index: int,
                 horizon: int, seed: int) -> int:
    kernel = _kernel(kind, model, p)
    law = peeling_law(kernel.model)
    rng = RngStream(seed, stream_id)
    position = 1
    for step in range(1, horizon + 1):
        position += unconstrained_increment(kernel, law, rng)[index]
        if position <= 0:
            return step
    return horizon + 1


def _slope(ns: np.ndarray, survival: np.ndarray):
    return stats.linregress(np.log(ns), np.log(survival))


def ladder_epoch_exponent(
    kernel: CrossingKernel,
    trials: int,
    horizon: int,
    rng: RngStream,
    component: Optional[WalkComponent] = None,
    runner: TrialRunner = SERIAL,
) -> ExponentFit:
    """
    Log-log slope of ``P(sigma >= n)`` for the walk started at 1, where sigma
    is the first time it is non-positive. The expected exponent is -1/3.

    The survival curve is fitted on a geometric grid over ``[horizon / 100, horizon]``.
    A fit whose upper half is flat, or whose two halves disagree, is rejected
    as not a power law.

    Raises:
        DomainError: If ``horizon < 10^4``
        InconclusiveResult: If fewer than ``MIN_FIT_SURVIVORS`` walks survive
            the window, or the fit is rejected
    """
    if horizon < 10_000:
        raise DomainError(f"horizon must be at least 10^4, got {horizon}")
    ids = stream_ids(rng.stream_id, LADDER_NAMESPACE, trials)
    task = partial(_ladder_task, kind=kernel.kind.value, model=kernel.model.kind.value, p=kernel.p,
                   index=_component_index(kernel, component), horizon=horizon, seed=rng.seed)
    epochs = np.sort(np.array(runner.map(task, ids)))
    survivors = int(np.count_nonzero(epochs > horizon))
    if survivors < settings.MIN_FIT_SURVIVORS:
        raise InconclusiveResult(
            f"only {survivors} of {trials} walks survive to n={horizon}; need {settings.MIN_FIT_SURVIVORS}",
            partial={"survivors": survivors, "trials": trials},
        )

    n_min = horizon // 100
    ns = np.unique(np.geomspace(n_min, horizon, FIT_POINTS).astype(int))
    survival = (len(epochs) - np.searchsorted(epochs, ns, side="left")) / len(epochs)
    fit = _slope(ns, survival)
    half = len(ns) // 2
    lower, upper = _slope(ns[:half], survival[:half]), _slope(ns[half:], survival[half:])
    tolerance = max(0.15, 3 * fit.stderr)
    if upper.slope > -0.05 or abs(upper.slope - lower.slope) > tolerance:
        raise InconclusiveResult(
            f"survival of {kernel.label} is not a power law on [{n_min}, {horizon}]: "
            f"slopes {lower.slope:.3f} / {upper.slope:.3f}",
            partial={"exponent": float(fit.slope), "lower": float(lower.slope), "upper": float(upper.slope)},
        )
    result = ExponentFit(exponent=float(fit.slope), stderr=float(fit.stderr), window=(int(ns[0]), int(ns[-1])),
                         survivors_at_end=survivors, total_steps=int(np.minimum(epochs, horizon).sum()))
    logger.info(f"✅ Ladder exponent of {kernel.label}: {result.exponent:.3f} ± {result.stderr:.3f}")
    return result


def _scaled_sample(kernel: CrossingKernel, component: Optional[WalkComponent], lam: float, t: float,
                   trials: int, rng: RngStream, runner: TrialRunner) -> np.ndarray:
    steps = math.floor(lam * t)
    ids = [derive_stream_id(rng.stream_id, SELFSIM_NAMESPACE, steps, i) for i in range(trials)]
    endpoints = _walk_endpoints(kernel, component, steps, ids, rng.seed, runner)
    return np.array(endpoints, dtype=float) / lam ** (2 / 3)


def self_similarity_check(
    kernel: CrossingKernel,
    lambda1: float,
    lambda2: float,
    t: float,
    trials: int,
    rng: RngStream,
    component: Optional[WalkComponent] = None,
    runner: TrialRunner = SERIAL,
) -> ScalingCheckReport:
    """
    Two-sample KS test between ``S_{floor(lambda1 t)} / lambda1^(2/3)`` and
    ``S_{floor(lambda2 t)} / lambda2^(2/3)``.

    Raises:
        DomainError: If lambda1 < 10, lambda2 < lambda1 or t <= 0
    """
    if lambda1 < 10 or lambda2 < lambda1 or t <= 0:
        raise DomainError(f"need 10 <= lambda1 <= lambda2 and t > 0, got ({lambda1}, {lambda2}, {t})")
    if lambda2 < 4 * lambda1:
        logger.warning(f"⚠️ lambda2={lambda2} is less than 4 * lambda1; the check has little power")
    first = _scaled_sample(kernel, component, lambda1, t, trials, rng, runner)
    second = _scaled_sample(kernel, component, lambda2, t, trials, rng, runner)
    test = stats.ks_2samp(first, second)
    report = ScalingCheckReport(
        lambdas=(lambda1, lambda2),
        t=t,
        ks_statistic=float(test.statistic),
        ks_pvalue=float(test.pvalue),
        sample_sizes=(len(first), len(second)),
        passed=bool(test.pvalue > settings.KS_PVALUE_THRESHOLD),
        total_steps=trials * (math.floor(lambda1 * t) + math.floor(lambda2 * t)),
    )
    logger.info(f"✅ Self-similarity of {kernel.label}: KS={report.ks_statistic:.4f}, p={report.ks_pvalue:.4g}")
    return report


def _xi_task(stream_id: int, kind: str, model: str, horizons: Sequence[int], seed: int) -> List[int]:
    kernel = CrossingKernel.critical(kind, model)
    law = peeling_law(kernel.model)
    step = STEPS[kernel.kind]
    rng = RngStream(seed, stream_id)
    # F does not depend on B, so B only has to stay positive
    state = WalkState(black_len=_UNREACHABLE)
    zeros: List[int] = []
    for horizon in horizons:
        while state.step_index < horizon:
            step(state, kernel, law, rng)
        zeros.append(state.free_zeros)
    return zeros


def xi_growth_check(
    kernel: CrossingKernel,
    horizons: Iterable[int],
    trials: int,
    rng: RngStream,
    runner: TrialRunner = SERIAL,
) -> XiGrowthReport:
    """
    Quantiles of ``xi_n / n^0.4``, xi_n counting the steps before n taken with
    an empty free segment. Each trial runs once to the largest horizon.

    Raises:
        DomainError: For the face kernel or a horizon below 10^4
    """
    if kernel.kind is KernelKind.FACE:
        raise DomainError("the face kernel has no free segment")
    horizons = sorted(set(int(n) for n in horizons))
    if not horizons or horizons[0] < 10_000:
        raise DomainError(f"horizons must be at least 10^4, got {horizons}")
    ids = stream_ids(rng.stream_id, XI_NAMESPACE, trials)
    task = partial(_xi_task, kind=kernel.kind.value, model=kernel.model.kind.value, horizons=horizons,
                   seed=rng.seed)
    counts = np.array(runner.map(task, ids), dtype=float)
    quantiles: Dict[int, Dict[str, float]] = {}
    for column, n in enumerate(horizons):
        normalized = counts[:, column] / n ** XI_EXPONENT
        quantiles[n] = {str(q): float(v) for q, v in zip(XI_QUANTILES, np.quantile(normalized, XI_QUANTILES))}
    report = XiGrowthReport(exponent=XI_EXPONENT, horizons=horizons, quantiles=quantiles,
                            total_steps=trials * horizons[-1])
    logger.info(f"✅ xi_n growth of {kernel.label}: medians {[round(m, 4) for m in report.medians]}")
    return report


def overshoot_frequencies(
    kernel: CrossingKernel,
    lam: float,
    a: float,
    bs: Sequence[float],
    trials: int,
    rng: RngStream,
    runner: TrialRunner = SERIAL,
    max_steps: Optional[int] = None,
) -> OvershootCheck:
    """
    Empirical ``P(|B_T| > floor(lambda b))`` for several b from one batch of
    stopped walks, next to the stable overshoot law.
    """
    for b in bs:
        scaled_lengths(lam, a, b)
    outcomes = crossing_outcomes(kernel, lam, a, trials, rng, runner=runner, max_steps=max_steps)
    stopped = [o for o in outcomes if o is not None]
    censored = (trials - len(stopped)) / trials
    rows: List[Dict[str, float]] = []
    for b in bs:
        threshold = math.floor(lam * b)
        frequency = sum(1 for o in stopped if o.overshoot > threshold) / trials
        rows.append({
            "b": float(b),
            "frequency": frequency,
            "analytic": overshoot_law(a, b),
            "ci_halfwidth": settings.CI_Z * math.sqrt(frequency * (1 - frequency) / trials),
            "censored_rate": censored,
        })
    return OvershootCheck(lambda_=lam, a=a, n_trials=trials, rows=rows,
                          total_steps=outcome_steps(outcomes, max_steps))
