from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from core.exceptions import DomainError
from models.peel_event import Orientation, PeelConfig
from services.enumeration_service import exposed_distribution, tail_mass
from services.peeling_service import (
    compose_vertex_peeling,
    sample_peel_event,
    sample_right_positive_event,
    sample_right_zero_event,
    sample_Rr_conditioned_positive,
    sample_vertex_peeling,
)
from utils.heavy_tail import LazyTailTable
from utils.rng import RngStream, derive_stream_id, stream_ids

N = 20_000


def test_rng_reproducible_and_independent():
    a, b = RngStream(7, 3), RngStream(7, 3)
    assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]
    c = RngStream(7, 4)
    assert [RngStream(7, 3).uniform() for _ in range(3)] != [c.uniform() for _ in range(3)]


def test_rng_batch_size_does_not_change_the_sequence():
    small, large = RngStream(11, 0, batch_size=7), RngStream(11, 0, batch_size=1000)
    assert [small.uniform() for _ in range(50)] == [large.uniform() for _ in range(50)]


def test_rng_substreams():
    parent = RngStream(5, 2)
    assert parent.substream(1, 4).stream_id == derive_stream_id(2, 1, 4)
    assert stream_ids(2, 1, 3) == [derive_stream_id(2, 1, i) for i in range(3)]
    assert len(set(stream_ids(2, 1, 1000))) == 1000


def test_rng_rejects_bad_keys():
    with pytest.raises(DomainError):
        RngStream(-1)
    with pytest.raises(DomainError):
        RngStream(0, 2**64)
    with pytest.raises(DomainError):
        RngStream(0).geometric_failures(0.0)


def test_geometric_failures_mean(rng):
    draws = [rng.geometric_failures(0.25) for _ in range(N)]
    assert np.mean(draws) == pytest.approx(3.0, abs=0.15)
    assert rng.geometric_failures(1.0) == 0


def test_lazy_table_matches_exact_law():
    term = lambda k: Fraction(1, 2**k)
    ratio = lambda k: Fraction(1, 2)
    table = LazyTailTable("geometric", term, ratio, 1, Fraction(1), exact_limit=8, max_size=32)
    assert table.survival(0) == 1.0
    assert table.survival(3) == pytest.approx(1 / 8)
    assert table.survival(20) == pytest.approx(2.0**-20)
    assert table.sample(1.0) == 1
    assert table.sample(0.3) == 2
    assert table.sample(2.0**-40) > 32
    assert table.last_index >= 32


def test_draws_past_the_exact_head_follow_the_law(tri_law):
    limit = 32
    table = LazyTailTable("tri side", tri_law.side_term, lambda k: Fraction(2 * k - 1, 2 * (k + 2)), 1,
                          tri_law.side_mass, exact_limit=limit)

    def survival(j):
        return float(tail_mass(tri_law, j) / tri_law.side_mass)

    rng = RngStream(3, 11)
    beyond = survival(limit)
    draws = np.array([table.sample(beyond * rng.open_uniform()) for _ in range(N)])
    assert draws.min() > limit
    for j in (64, 256, 1024):
        expected = survival(j) / beyond
        assert abs(np.mean(draws > j) - expected) < 4 * np.sqrt(expected * (1 - expected) / N)
    rho, _ = stats.spearmanr(draws[:-1], draws[1:])
    assert abs(rho) < 4 / np.sqrt(N)


def test_far_tail_draw_follows_power_law():
    # S(j) = 1 / (j + 1)
    term = lambda k: Fraction(1, k * (k + 1))
    ratio = lambda k: Fraction(k, k + 2)
    table = LazyTailTable("harmonic", term, ratio, 1, Fraction(1), exact_limit=8, max_size=32)
    assert table.sample(0.021) == 47
    assert table.sample(2.0**-53) == pytest.approx(2.0**53, rel=0.05)
    assert len(table) == 32


def test_lazy_table_rejects_empty_law():
    with pytest.raises(DomainError):
        LazyTailTable("empty", lambda k: Fraction(0), lambda k: Fraction(1), 1, Fraction(0))


def test_every_event_uses_three_uniforms(quad_law, rng):
    for _ in range(100):
        before = rng.draws
        sample_peel_event(quad_law, rng)
        assert rng.draws - before == 3


def test_exposed_frequencies(quad_law, rng):
    exact = exposed_distribution(quad_law)
    counts = Counter(sample_peel_event(quad_law, rng).exposed for _ in range(N))
    observed = [counts[e] for e in exact]
    expected = [float(p) * N for p in exact.values()]
    assert stats.chisquare(observed, expected).pvalue > 0.001


def test_swallowed_small_values(tri_law, rng):
    events = [sample_peel_event(tri_law, rng) for _ in range(N)]
    # Frequencies rather than means: the tails have infinite variance
    right = Counter(e.swallowed_right for e in events)
    assert right[0] / N == pytest.approx(5 / 6, abs=0.01)
    assert right[1] / N == pytest.approx(float(tri_law.q_side(1)), abs=0.01)
    assert all(e.config is not PeelConfig.FOUR_ON_BOUNDARY for e in events)


def test_four_on_boundary_events(quad_law, rng):
    events = [sample_peel_event(quad_law, rng) for _ in range(N)]
    four = [e for e in events if e.config is PeelConfig.FOUR_ON_BOUNDARY]
    assert len(four) / N == pytest.approx(1 / 8, abs=0.01)
    for e in four:
        assert e.k1 % 2 == 1 and e.k2 % 2 == 1
        if e.orientation is Orientation.RIGHT:
            assert e.swallowed_right == e.k1 + e.k2 and e.swallowed_left == 0
        elif e.orientation is Orientation.SPLIT:
            assert (e.swallowed_left, e.swallowed_right) == (e.k1, e.k2)


def test_conditioned_samplers(quad_law, rng):
    assert all(sample_right_zero_event(quad_law, rng).swallowed_right == 0 for _ in range(2000))
    assert all(sample_right_positive_event(quad_law, rng).swallowed_right > 0 for _ in range(2000))
    assert quad_law.right_positive_probability == pytest.approx(2 / 9)


def test_rr_conditioned_on_positive_small_values(quad_law, rng):
    draws = Counter(sample_Rr_conditioned_positive(quad_law, rng) for _ in range(N))
    # R_r = 1 comes from right-odd at p = 1 (1/9) and four-split with k2 = 1 (1/27)
    p1 = float((Fraction(1, 9) + Fraction(1, 27)) / Fraction(2, 9))
    assert draws[1] / N == pytest.approx(p1, abs=0.015)
    assert min(draws) >= 1


def test_vertex_peeling_step_count(quad_law, rng):
    outcomes = [sample_vertex_peeling(quad_law, rng) for _ in range(N)]
    assert np.mean([o.steps for o in outcomes]) == pytest.approx(4.5, abs=0.1)
    assert all(o.right_swallowed > 0 and len(o.left_history) == o.steps for o in outcomes)


def test_vertex_peeling_matches_composition(quad_law):
    direct_rng, composed_rng = RngStream(1, 1), RngStream(1, 2)
    direct = [sample_vertex_peeling(quad_law, direct_rng) for _ in range(5000)]
    composed = [compose_vertex_peeling(quad_law, composed_rng) for _ in range(5000)]
    assert stats.ks_2samp([o.steps for o in direct], [o.steps for o in composed]).pvalue > 0.001
    assert stats.ks_2samp([o.right_swallowed for o in direct],
                          [o.right_swallowed for o in composed]).pvalue > 0.001
