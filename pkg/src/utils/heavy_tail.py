"""
Lazily extended inverse-transform tables for heavy-tailed integer laws.
"""
import bisect
import logging
import threading
from fractions import Fraction
from typing import Callable, List, Optional

import mpmath

from core.config import settings
from core.exceptions import DomainError

logger = logging.getLogger(__name__)


class LazyTailTable:
    """
    Law of an integer ``X >= first`` with weights ``term(j)`` summing to ``total``.

    The table stores the survival function ``S(j) = P(X > j)``. Entries up to
    ``exact_limit`` come from exact rational partial sums; beyond that the
    weights follow the rational term ratio in mpmath arithmetic, and the
    residual mass is always ``total`` minus the realized prefix, so nothing is
    truncated. Storage doubles on demand up to ``max_size``; draws that land
    beyond it walk the tail term by term without storing it, for at most
    ``max_size`` terms before following the power-law asymptote.

    Args:
        term: Exact weight of index ``j``
        ratio: Exact ``term(j + 1) / term(j)``
        first: Smallest index of the support
        total: Exact total weight (closed form)
    """

    def __init__(
        self,
        name: str,
        term: Callable[[int], Fraction],
        ratio: Callable[[int], Fraction],
        first: int,
        total: Fraction,
        exact_limit: Optional[int] = None,
        max_size: Optional[int] = None,
        dps: Optional[int] = None,
    ):
        if total <= 0:
            raise DomainError(f"{name}: total weight must be positive")
        self.name = name
        self.first = first
        self.total = Fraction(total)
        self._term = term
        self._ratio = ratio
        self._exact_limit = exact_limit or settings.TAIL_EXACT_LIMIT
        self._max_size = max_size or settings.TAIL_TABLE_MAX_SIZE
        self._dps = dps or settings.TAIL_PRECISION_DPS
        self._lock = threading.Lock()

        self._neg_survival: List[float] = []
        self._exact_remaining = self.total
        self._next_index = first
        self._remaining_mp = None
        self._last_term_mp = None
        self.extend_to(min(64, self._exact_limit))

    def __len__(self) -> int:
        return len(self._neg_survival)

    @property
    def last_index(self) -> int:
        return self._next_index - 1

    def survival(self, j: int) -> float:
        """P(X > j) for a tabulated index."""
        if j < self.first:
            return 1.0
        self.extend_to(j - self.first + 1)
        return -self._neg_survival[j - self.first]

    def extend_to(self, size: int) -> None:
        """Make sure at least ``size`` entries are stored (idempotent, monotone)."""
        if size <= len(self._neg_survival):
            return
        with self._lock:
            target = min(size, self._max_size)
            if target <= len(self._neg_survival):
                return
            with mpmath.workdps(self._dps):
                while len(self._neg_survival) < target:
                    self._append_next()
            logger.debug(f"{self.name}: table extended to {len(self._neg_survival)} entries")

    def sample(self, v: float) -> int:
        """
        Inverse transform from a draw ``v`` in (0, 1].

        Returns the smallest ``j`` with ``S(j) < v``, which has probability
        ``S(j - 1) - S(j)``.
        """
        while True:
            neg = self._neg_survival
            idx = bisect.bisect_right(neg, -v)
            if idx < len(neg):
                return self.first + idx
            if len(neg) >= self._max_size:
                return self._walk_beyond(v)
            self.extend_to(2 * len(neg))

    def _append_next(self) -> None:
        j = self._next_index
        offset = j - self.first
        if offset < self._exact_limit:
            self._exact_remaining -= self._term(j)
            survival = self._exact_remaining / self.total
            value = float(survival)
            if offset == self._exact_limit - 1:
                self._remaining_mp = _to_mpf(self._exact_remaining)
                self._last_term_mp = _to_mpf(self._term(j))
        else:
            self._last_term_mp = self._last_term_mp * _to_mpf(self._ratio(j - 1))
            self._remaining_mp = self._remaining_mp - self._last_term_mp
            value = float(self._remaining_mp / _to_mpf(self.total))
        self._neg_survival.append(-value)
        self._next_index = j + 1

    def _walk_beyond(self, v: float) -> int:
        """
        Walk the tail past the table for at most ``max_size`` more terms, then
        jump along the power law ``S(j) ~ C j^-alpha`` calibrated where the walk stopped.
        """
        with self._lock, mpmath.workdps(self._dps):
            j = self._next_index - 1
            remaining = self._remaining_mp
            term = self._last_term_mp
            threshold = mpmath.mpf(v) * _to_mpf(self.total)
            if remaining is None:
                raise DomainError(f"{self.name}: max_size must exceed the exact limit")
            limit = j + self._max_size
            while remaining >= threshold and j < limit:
                term = term * _to_mpf(self._ratio(j))
                remaining = remaining - term
                j += 1
            if remaining >= threshold:
                alpha = j * term / remaining
                j = int(mpmath.floor(j * (remaining / threshold) ** (1 / alpha))) + 1
                logger.debug(f"{self.name}: far-tail draw extrapolated with exponent {float(alpha):.3f}")
        logger.debug(f"{self.name}: far-tail draw at index {j}")
        return j


def _to_mpf(value: Fraction):
    return mpmath.mpf(value.numerator) / value.denominator
