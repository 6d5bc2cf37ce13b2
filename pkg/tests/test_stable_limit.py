from fractions import Fraction
import random

import pytest

from core.exceptions import DomainError, InconclusiveResult
from models.kernel import CrossingKernel, WalkComponent
from services.crossing_service import crossing_formula
from services.stable_limit_service import (
    ladder_epoch_exponent,
    overshoot_frequencies,
    overshoot_law,
    positivity_check,
    self_similarity_check,
    single_step_positivity,
    xi_growth_check,
)
from utils.parallel import TrialRunner
from utils.rng import RngStream


def test_overshoot_law_values():
    assert overshoot_law(1, 1) == pytest.approx(0.5)
    assert overshoot_law(1, 3) == pytest.approx(1 / 3)
    assert overshoot_law(3, 1) == pytest.approx(2 / 3)
    with pytest.raises(DomainError):
        overshoot_law(0, 1)
    with pytest.raises(DomainError):
        overshoot_law(1, -2)


def test_overshoot_law_is_the_crossing_formula():
    rng = random.Random(4)
    for _ in range(100):
        a, b = rng.uniform(0.01, 100), rng.uniform(0.01, 100)
        assert overshoot_law(a, b) == crossing_formula(a, b)


@pytest.mark.parametrize(
    "kind,model,component,expected",
    [
        ("bond", "tri", WalkComponent.FREE, Fraction(1, 2)),
        ("bond", "quad", WalkComponent.FREE, Fraction(1, 3)),
        ("face", "quad", WalkComponent.BLACK, Fraction(3, 8)),
        ("face", "tri", WalkComponent.BLACK, Fraction(8, 15)),
        ("bond", "quad", WalkComponent.BLACK, Fraction(1, 3)),
        ("site", "tri", WalkComponent.BLACK, Fraction(1, 2)),
    ],
)
def test_single_step_positivity(kind, model, component, expected):
    assert single_step_positivity(CrossingKernel.critical(kind, model), component) == expected


def test_single_step_positivity_domain():
    with pytest.raises(DomainError):
        single_step_positivity(CrossingKernel.critical("site", "quad"), WalkComponent.FREE)
    with pytest.raises(DomainError):
        single_step_positivity(CrossingKernel.critical("face", "quad"), WalkComponent.FREE)


@pytest.mark.parametrize("kind,model", [("bond", "tri"), ("face", "quad")])
def test_positivity_after_one_step_matches_exact(kind, model):
    kernel = CrossingKernel.critical(kind, model)
    report = positivity_check(kernel, 1, 20_000, RngStream(21))
    exact = float(single_step_positivity(kernel, kernel.default_component()))
    assert abs(report.frequency - exact) < 4 * report.stderr
    assert report.expected == pytest.approx(2 / 3)
    assert report.total_steps == 20_000


def test_positivity_rejects_bad_arguments(rng):
    with pytest.raises(DomainError):
        positivity_check(CrossingKernel.critical("bond", "tri"), 0, 10, rng)
    with pytest.raises(DomainError):
        positivity_check(CrossingKernel.critical("face", "tri"), 5, 10, rng, WalkComponent.FREE)


def test_self_similarity_of_identical_scales():
    kernel = CrossingKernel.critical("bond", "quad")
    report = self_similarity_check(kernel, 10, 10, 1.0, 200, RngStream(6))
    assert report.ks_statistic == 0.0 and report.passed
    assert report.sample_sizes == (200, 200)


def test_self_similarity_domain(rng):
    kernel = CrossingKernel.critical("site", "quad")
    for lambdas, t in [((5, 100), 1.0), ((100, 50), 1.0), ((10, 40), 0.0)]:
        with pytest.raises(DomainError):
            self_similarity_check(kernel, *lambdas, t, 10, rng)


def test_ladder_needs_survivors():
    kernel = CrossingKernel.critical("face", "quad")
    with pytest.raises(InconclusiveResult) as info:
        ladder_epoch_exponent(kernel, 50, 10_000, RngStream(7))
    assert info.value.partial["trials"] == 50
    with pytest.raises(DomainError):
        ladder_epoch_exponent(kernel, 50, 1000, RngStream(7))


def test_xi_growth_domain(rng):
    with pytest.raises(DomainError):
        xi_growth_check(CrossingKernel.critical("face", "tri"), [10_000], 10, rng)
    with pytest.raises(DomainError):
        xi_growth_check(CrossingKernel.critical("bond", "tri"), [100, 10_000], 10, rng)


def test_xi_growth_small_run():
    report = xi_growth_check(CrossingKernel.critical("bond", "quad"), [20_000, 10_000], 8, RngStream(3))
    assert report.horizons == [10_000, 20_000]
    for n in report.horizons:
        values = list(report.quantiles[n].values())
        assert values == sorted(values) and values[0] >= 0


def test_overshoot_frequencies_small_run():
    kernel = CrossingKernel.critical("bond", "quad")
    check = overshoot_frequencies(kernel, 10, 1, [0.5, 1, 2], 200, RngStream(12), max_steps=10_000)
    frequencies = [row["frequency"] for row in check.rows]
    assert frequencies == sorted(frequencies, reverse=True)
    assert [row["analytic"] for row in check.rows] == [overshoot_law(1, b) for b in (0.5, 1, 2)]
    assert check.n_trials == 200
    assert check.total_steps > 0


@pytest.mark.slow
@pytest.mark.parametrize("kind,model", [("bond", "tri"), ("face", "quad")])
def test_positivity_parameter(kind, model):
    report = positivity_check(CrossingKernel.critical(kind, model), 10_000, 10_000, RngStream(1),
                              runner=TrialRunner(workers=8))
    assert abs(report.frequency - 2 / 3) < 0.02


@pytest.mark.slow
@pytest.mark.parametrize("kind,model", [("bond", "tri"), ("site", "quad")])
def test_ladder_exponent_at_criticality(kind, model):
    fit = ladder_epoch_exponent(CrossingKernel.critical(kind, model), 10_000, 100_000,
                                RngStream(2), runner=TrialRunner(workers=8))
    assert -0.40 <= fit.exponent <= -0.26


@pytest.mark.slow
def test_ladder_rejects_drifting_walk():
    kernel = CrossingKernel.critical("bond", "tri").with_probability(0.5)
    with pytest.raises(InconclusiveResult):
        ladder_epoch_exponent(kernel, 2000, 10_000, RngStream(2), WalkComponent.BLACK, TrialRunner(workers=8))


@pytest.mark.slow
@pytest.mark.parametrize("kind,model", [("bond", "quad"), ("face", "quad"), ("site", "quad"), ("face", "tri")])
def test_self_similarity_across_scales(kind, model):
    report = self_similarity_check(CrossingKernel.critical(kind, model), 100, 400, 1.0, 5000,
                                   RngStream(3), runner=TrialRunner(workers=8))
    assert report.passed


@pytest.mark.slow
def test_xi_medians_do_not_grow():
    report = xi_growth_check(CrossingKernel.critical("bond", "tri"), [10_000, 100_000, 1_000_000], 200,
                             RngStream(4), TrialRunner(workers=8))
    medians = report.medians
    assert medians[1] <= medians[0] * 1.1 and medians[2] <= medians[1] * 1.1


@pytest.mark.slow
def test_overshoot_law_at_large_lambda():
    check = overshoot_frequencies(CrossingKernel.critical("bond", "quad"), 800, 1, [0.5, 1, 2], 10_000,
                                  RngStream(5), TrialRunner(workers=8))
    for row in check.rows:
        assert abs(row["frequency"] - row["analytic"]) < 0.02 + row["ci_halfwidth"] + row["censored_rate"]
