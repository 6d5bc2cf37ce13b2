"""
Counter-based random streams for reproducible parallel Monte Carlo.
"""
import math
from typing import List, Optional

import numpy as np

from core.config import settings
from core.exceptions import DomainError

_U64 = 2**64


class RngStream:
    """
    A Philox4x64 stream keyed by ``(seed, stream_id)``.

    Philox is counter based: the key fixes the whole sequence, so equal keys
    reproduce equal draws and distinct stream ids give independent streams
    without any coordination between workers. Uniforms are fetched in batches
    because the simulators consume them one at a time.
    """

    __slots__ = ("seed", "stream_id", "draws", "_generator", "_buffer", "_position", "_batch")

    def __init__(self, seed: int, stream_id: int = 0, batch_size: Optional[int] = None):
        if not 0 <= seed < _U64:
            raise DomainError(f"seed must be a 64-bit unsigned value, got {seed}")
        if not 0 <= stream_id < _U64:
            raise DomainError(f"stream_id must be a 64-bit unsigned value, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        self.draws = 0
        self._batch = batch_size or settings.RNG_BATCH_SIZE
        self._generator = np.random.Generator(np.random.Philox(key=seed + (stream_id << 64)))
        self._buffer = []
        self._position = 0

    def uniform(self) -> float:
        """Next draw in [0, 1)."""
        if self._position >= len(self._buffer):
            self._buffer = self._generator.random(self._batch).tolist()
            self._position = 0
        u = self._buffer[self._position]
        self._position += 1
        self.draws += 1
        return u

    def open_uniform(self) -> float:
        """Next draw in (0, 1]."""
        return 1.0 - self.uniform()

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def geometric_failures(self, success: float) -> int:
        """Number of failures before the first success of Bernoulli(success) trials."""
        if not 0 < success <= 1:
            raise DomainError(f"success probability must lie in (0, 1], got {success}")
        if success == 1:
            self.uniform()
            return 0
        return int(math.floor(math.log(self.open_uniform()) / math.log1p(-success)))

    def substream(self, *path: int) -> "RngStream":
        """Child stream addressed by a path of non-negative integers."""
        return RngStream(self.seed, derive_stream_id(self.stream_id, *path), self._batch)


def derive_stream_id(parent: int, *path: int) -> int:
    """Hash a parent stream id and an index path into a fresh 64-bit stream id."""
    sequence = np.random.SeedSequence(entropy=parent, spawn_key=tuple(int(i) for i in path))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream_ids(parent: int, namespace: int, count: int, start: int = 0) -> List[int]:
    return [derive_stream_id(parent, namespace, index) for index in range(start, start + count)]
