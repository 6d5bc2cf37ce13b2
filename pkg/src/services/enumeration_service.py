"""
Exact partition functions and peeling-step laws of the half-planar maps.

Closed forms:
    triangulations without loops (multiple edges allowed) and a simple boundary
        Z_{m+2} = (2m)! / (m! (m+2)!) * (9/4)^{m+1}
    quadrangulations with a simple boundary of length 2p
        Z_{2p} = 8^p (3p-3)! / (3 (p-1)! (2p)!)

Both are checked against the counting-series oracle below, which sums the
exact map counts weighted by rho^{-n} and certifies the tail.
"""
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import mpmath
import numpy as np
import sympy
from scipy import stats

from core.config import settings
from core.exceptions import DomainError
from models.law_summary import LawMoments, OracleBound, TailAsymptotics
from models.map_model import MapKind, MapModel
from models.peel_event import Orientation
from models.peeling_law import EventFamily, FamilyShape, PeelingLaw, SizeLaw
from utils import fuss_catalan
from utils.fuss_catalan import as_fraction

logger = logging.getLogger(__name__)

# Tail certification: t_{n+1}/t_n <= n/(n+2) for n >= N gives sum_{n>N} t_n <= N t_N
_TAIL_SHIFT = 0
_TAIL_DECAY = 2


def _check_boundary(model: MapModel, m: int) -> None:
    if m < 2:
        raise DomainError(f"boundary length must be at least 2, got {m}")
    if model.is_quadrangulation and m % 2:
        raise DomainError(f"quadrangulations have even boundary length, got {m}")


def partition_function(model: MapModel, m: int) -> Fraction:
    """
    Exact partition function Z_m at the critical weight ``1/rho``.

    Args:
        model: Map ensemble
        m: Boundary length (even for quadrangulations)

    Returns:
        Z_m as an exact rational

    Raises:
        DomainError: If m < 2, or m is odd for quadrangulations
    """
    _check_boundary(model, m)
    return _partition_function(model.kind, m)


@lru_cache(maxsize=4096)
def _partition_function(kind: MapKind, m: int) -> Fraction:
    if kind is MapKind.TRIANGULATION:
        n = m - 2
        return Fraction(math.factorial(2 * n), math.factorial(n) * math.factorial(n + 2)) * Fraction(9, 4) ** (n + 1)
    p = m // 2
    return Fraction(8**p * math.factorial(3 * p - 3), 3 * math.factorial(p - 1) * math.factorial(2 * p))


def _alpha_power(model: MapModel, exponent: int) -> Fraction:
    # alpha^e stays rational only for even e on quadrangulations
    if exponent % 2 == 0:
        return model.alpha_sq ** (exponent // 2)
    root = math.isqrt(model.alpha_sq.numerator)
    if model.alpha_sq.denominator != 1 or root * root != model.alpha_sq.numerator:
        raise DomainError(f"odd power of alpha is irrational for {model.kind.value}")
    return Fraction(root) ** exponent


def _counting_series(model: MapModel, m: int) -> Tuple[Fraction, Callable[[int], Tuple[int, int]], sympy.Expr]:
    """First term, integer term ratio and symbolic ratio of sum_n phi_{n,m} rho^{-n}."""
    n = sympy.Symbol("n", integer=True, nonnegative=True)
    if model.kind is MapKind.TRIANGULATION:
        b = m - 2
        first = Fraction(fuss_catalan.fuss_catalan(2, b))

        def ratio(k: int) -> Tuple[int, int]:
            s = 2 * b + 3 * k
            return 4 * (s + 1) * (s + 2) * (s + 3), 27 * (k + 1) * (2 * k + 2 * b + 3) * (2 * k + 2 * b + 4)

        symbolic = 4 * (2 * b + 3 * n + 1) * (2 * b + 3 * n + 2) * (2 * b + 3 * n + 3) / (
            27 * (n + 1) * (2 * n + 2 * b + 3) * (2 * n + 2 * b + 4))
        return first, ratio, symbolic

    p = m // 2
    first = Fraction(math.factorial(3 * p - 3), math.factorial(p - 1) * math.factorial(2 * p - 1))

    def ratio(k: int) -> Tuple[int, int]:
        return (2 * k + 3 * p - 2) * (2 * k + 3 * p - 1), 4 * (k + 1) * (k + 3 * p)

    symbolic = (2 * n + 3 * p - 2) * (2 * n + 3 * p - 1) / (4 * (n + 1) * (n + 3 * p))
    return first, ratio, symbolic


def _certify_ratio_bound(symbolic: sympy.Expr, start: int) -> None:
    n = next(iter(symbolic.free_symbols))
    numerator, denominator = sympy.fraction(sympy.together(symbolic))
    gap = sympy.Poly(
        sympy.expand((n + _TAIL_SHIFT) * denominator - (n + _TAIL_SHIFT + _TAIL_DECAY) * numerator), n
    )
    if gap.eval(start) <= 0 or gap.LC() <= 0 or gap.count_roots(start, None) != 0:
        raise DomainError(f"term ratio bound does not hold from n = {start}; raise the number of terms")


def oracle_partition_function(model: MapModel, m: int, terms: Optional[int] = None) -> OracleBound:
    """
    Certified enclosure of Z_m from the exact counting series.

    The partial sum of the first ``terms`` terms is a lower bound. The tail is
    bounded through ``t_{n+1}/t_n <= n/(n+2)``, verified symbolically for all
    n past the cut, which telescopes to ``sum_{n>N} t_n <= N t_N``.
    """
    _check_boundary(model, m)
    terms = terms or settings.ORACLE_TERMS
    first, ratio, symbolic = _counting_series(model, m)
    last = terms - 1
    _certify_ratio_bound(symbolic, last)

    with mpmath.workdps(settings.ORACLE_DPS):
        term = mpmath.mpf(first.numerator) / first.denominator
        total = term
        for k in range(last):
            num, den = ratio(k)
            term = term * num / den
            total += term
        tail = (last + _TAIL_SHIFT) * term / (_TAIL_DECAY - 1)
        bound = OracleBound(model.kind, m, terms, +total, total + tail)
    logger.debug(f"oracle Z_{m} ({model.kind.value}): [{bound.lower}, {bound.upper}]")
    return bound


# ---------------------------------------------------------------------------
# Peeling laws


def _side_term(model: MapModel) -> Callable[[int], Fraction]:
    if model.kind is MapKind.TRIANGULATION:
        return lambda k: partition_function(model, k + 1) / _alpha_power(model, k)

    def q(k: int) -> Fraction:
        if k % 2:
            return partition_function(model, k + 1) * _alpha_power(model, 1 - k) / model.rho
        return partition_function(model, k + 2) / _alpha_power(model, k) / model.rho

    return q


@lru_cache(maxsize=None)
def peeling_law(model: MapModel) -> PeelingLaw:
    """
    Build the exact q-law of ``model``.

    Tail masses come from the Fuss-Catalan resummation, so the returned law
    satisfies its normalization identity exactly.
    """
    logger.info(f"🚀 Building peeling law for {model.kind.value}")
    q_side = _side_term(model)
    exposed_inner = model.face_degree - 1
    new_vertices = model.face_degree - 2
    q_inner = _alpha_power(model, new_vertices) / model.rho**new_vertices
    j = fuss_catalan.j

    if model.kind is MapKind.TRIANGULATION:
        # q_k = (1/4) Cat_{k-1} 4^{-(k-1)} / (k + 1)
        side_mass = as_fraction(fuss_catalan.weighted_sum(2, 1 / (j + 2)) / 4)
        side_moment = as_fraction(fuss_catalan.weighted_sum(2, (j + 1) / (j + 2)) / 4)
        sizes = SizeLaw("tri-side", q_side, lambda k: Fraction(2 * k - 1, 2 * (k + 2)), 1, side_mass, side_moment)
        families = (
            EventFamily("inner", q_inner, FamilyShape.INNER, exposed_inner),
            EventFamily("left", side_mass, FamilyShape.THIRD, 1, side="left", sizes=sizes),
            EventFamily("right", side_mass, FamilyShape.THIRD, 1, side="right", sizes=sizes),
        )
        law = PeelingLaw(model, q_inner, q_side, 1, side_mass, Fraction(0), None, 0, families)
    else:
        # q_{2p-1} = q_{2p-2} = (y/12) * 9 T_{p-1} y^{p-1} / p with T the ternary numbers, y = 4/27
        y, _ = fuss_catalan.critical_point(3)
        odd_mass = as_fraction(3 * y / 4 * fuss_catalan.weighted_sum(3, 1 / (j + 1)))
        odd_moment = as_fraction(3 * y / 4 * fuss_catalan.weighted_sum(3, sympy.Integer(1)))
        sizes = SizeLaw(
            "quad-side",
            lambda p: q_side(2 * p - 1),
            lambda p: Fraction(2 * (3 * p - 2) * (3 * p - 1), 9 * (2 * p + 1) * (p + 1)),
            1, odd_mass, odd_moment,
        )
        zero = q_side(0)
        joint_mass = odd_mass**2 * model.rho**2 / model.alpha_sq

        def q_joint(k1: int, k2: int) -> Fraction:
            return (partition_function(model, k1 + 1) * partition_function(model, k2 + 1)
                    / _alpha_power(model, k1 + k2))

        families = (
            EventFamily("inner", q_inner, FamilyShape.INNER, exposed_inner),
            EventFamily("left-odd", odd_mass, FamilyShape.THIRD, 2, side="left", sizes=sizes, scale=2, offset=1),
            EventFamily("left-even", odd_mass, FamilyShape.THIRD, 1, side="left", sizes=sizes, scale=2, offset=2),
            EventFamily("right-odd", odd_mass, FamilyShape.THIRD, 2, side="right", sizes=sizes, scale=2, offset=1),
            EventFamily("right-zero", zero, FamilyShape.THIRD, 1, side="right", fixed_k=0),
            EventFamily("right-even", odd_mass - zero, FamilyShape.THIRD, 1, side="right",
                        sizes=sizes.truncated(2), scale=2, offset=2),
            EventFamily("four-left", joint_mass, FamilyShape.FOUR, 1, orientation=Orientation.LEFT,
                        sizes=sizes, scale=2, offset=1),
            EventFamily("four-split", joint_mass, FamilyShape.FOUR, 1, orientation=Orientation.SPLIT,
                        sizes=sizes, scale=2, offset=1),
            EventFamily("four-right", joint_mass, FamilyShape.FOUR, 1, orientation=Orientation.RIGHT,
                        sizes=sizes, scale=2, offset=1),
        )
        law = PeelingLaw(model, q_inner, q_side, 0, 2 * odd_mass, joint_mass, q_joint, 3, families)

    total = law.normalization()
    if total != 1:
        raise DomainError(f"peeling law of {model.kind.value} has total mass {total}")
    logger.info(f"✅ Peeling law ready: q_inner={q_inner}, side mass={law.side_mass}, joint mass={law.joint_mass}")
    return law


def law_moments(law: PeelingLaw) -> LawMoments:
    """Exact moments of one peeling step, tails resummed in closed form."""
    families = law.families
    e_exposed = sum((f.mass * f.exposed for f in families), Fraction(0))
    e_left = sum((f.mass * f.mean_swallowed("left") for f in families), Fraction(0))
    e_right = sum((f.mass * f.mean_swallowed("right") for f in families), Fraction(0))
    eta = law.right_positive.total
    delta = e_left + e_right
    return LawMoments(
        E_exposed=e_exposed,
        E_swallowed=delta,
        eta=eta,
        delta=delta,
        E_Rr_given_positive=e_right / eta,
        E_left=e_left,
        E_right=e_right,
    )


def exposed_distribution(law: PeelingLaw) -> Dict[int, Fraction]:
    """Exact law of the number of exposed edges."""
    distribution: Dict[int, Fraction] = {}
    for family in law.families:
        distribution[family.exposed] = distribution.get(family.exposed, Fraction(0)) + family.mass
    return dict(sorted(distribution.items()))


def swallowed_distribution(law: PeelingLaw, side: str, k_max: int) -> Dict[int, Fraction]:
    """Exact head ``{k: P(R_side = k)}`` for ``k <= k_max``."""
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side}")
    head: Dict[int, Fraction] = {k: Fraction(0) for k in range(k_max + 1)}
    for family in law.families:
        if not _touches(family, side):
            head[0] += family.mass
            continue
        if family.shape is FamilyShape.THIRD:
            for k, prob in family.segments(k_max):
                head[k] += family.mass * prob
            continue
        pairs = [(a, pa) for a, pa in family.segments(k_max)]
        for a, pa in pairs:
            for b, pb in pairs:
                if family.orientation is Orientation.SPLIT:
                    k = a if side == "left" else b
                else:
                    k = a + b
                if k <= k_max:
                    head[k] += family.mass * pa * pb
    return head


def _touches(family: EventFamily, side: str) -> bool:
    if family.shape is FamilyShape.THIRD:
        return family.side == side
    if family.shape is FamilyShape.FOUR:
        return family.orientation in (Orientation.SPLIT, Orientation(side))
    return False


def tail_mass(law: PeelingLaw, k_max: int) -> Fraction:
    """Residual one-side mass of third-vertex events beyond ``k_max``."""
    return law.side_tail_mass(k_max)


def fit_tail(law: PeelingLaw, k_min: int, k_max: int) -> TailAsymptotics:
    """
    Fit ``log q_side(k) + 5/2 log k`` against a constant over ``[k_min, k_max]``.

    Raises:
        DomainError: If k_min < 10, k_max <= k_min or the window has fewer
            than 10 points
    """
    if k_min < 10 or k_max <= k_min:
        raise DomainError(f"fit window needs k_max > k_min >= 10, got ({k_min}, {k_max})")
    if k_max - k_min + 1 < 10:
        raise DomainError(f"fit window ({k_min}, {k_max}) has fewer than 10 points")

    ks = np.arange(k_min, k_max + 1)
    log_q = np.array([float(mpmath.log(mpmath.mpf(q.numerator) / q.denominator))
                      for q in (law.q_side(int(k)) for k in ks)])
    residual = log_q + 2.5 * np.log(ks)
    constant = float(np.exp(residual.mean()))
    slope = stats.linregress(np.log(ks), residual).slope
    return TailAsymptotics(
        kind=law.model.kind,
        iota=constant * float(law.model.iota_per_side_constant),
        side_tail_constant=constant,
        residual_slope=float(slope),
        window=(k_min, k_max),
    )
