"""
Shared fixtures
"""
from typing import Iterable, List

import pytest

from models.map_model import QUADRANGULATION, TRIANGULATION
from services.enumeration_service import peeling_law
from utils.rng import RngStream

SEED = 20150601


class ScriptedRng:
    """Replays a fixed list of uniforms; stands in for RngStream in single-step tests"""

    def __init__(self, uniforms: Iterable[float]):
        self._uniforms: List[float] = list(uniforms)
        self.draws = 0

    def uniform(self) -> float:
        u = self._uniforms[self.draws]
        self.draws += 1
        return u

    def open_uniform(self) -> float:
        return 1.0 - self.uniform()

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    @property
    def exhausted(self) -> bool:
        return self.draws == len(self._uniforms)


@pytest.fixture(scope="session")
def tri_law():
    return peeling_law(TRIANGULATION)


@pytest.fixture(scope="session")
def quad_law():
    return peeling_law(QUADRANGULATION)


@pytest.fixture
def rng():
    return RngStream(SEED)
