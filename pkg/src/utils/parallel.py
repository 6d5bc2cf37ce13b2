"""
Process pool for embarrassingly parallel trials.
"""
import logging
import multiprocessing
from typing import Callable, List, Optional, Sequence, TypeVar

from core.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class TrialRunner:
    """
    Map a picklable trial function over its inputs, in input order.

    Results come back in the order of ``items`` whatever the worker count, so
    aggregates built from them do not depend on scheduling.
    """

    def __init__(self, workers: Optional[int] = None, chunksize: Optional[int] = None):
        self.workers = workers or settings.WORKERS
        self.chunksize = chunksize

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        items = list(items)
        if self.workers <= 1 or len(items) < 2:
            return [fn(item) for item in items]
        chunksize = self.chunksize or max(1, len(items) // (self.workers * 8))
        logger.debug(f"Dispatching {len(items)} trials to {self.workers} workers (chunks of {chunksize})")
        with multiprocessing.get_context().Pool(self.workers) as pool:
            return pool.map(fn, items, chunksize)


SERIAL = TrialRunner(workers=1)
