import dataclasses
import threading
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
import sympy

from core.exceptions import DomainError
from models.map_model import QUADRANGULATION, TRIANGULATION, MapKind, MapModel
from services.enumeration_service import (
    exposed_distribution,
    fit_tail,
    law_moments,
    oracle_partition_function,
    partition_function,
    peeling_law,
    swallowed_distribution,
    tail_mass,
)
from utils import fuss_catalan


def test_partition_function_values():
    assert partition_function(QUADRANGULATION, 2) == Fraction(4, 3)
    assert partition_function(QUADRANGULATION, 4) == Fraction(16, 3)
    assert partition_function(TRIANGULATION, 2) == Fraction(9, 8)
    assert partition_function(TRIANGULATION, 3) == Fraction(27, 16)


@pytest.mark.parametrize("model,m", [(TRIANGULATION, 1), (QUADRANGULATION, 0), (QUADRANGULATION, 3)])
def test_partition_function_rejects_bad_boundary(model, m):
    with pytest.raises(DomainError):
        partition_function(model, m)


def test_map_model_constants_are_checked():
    with pytest.raises(DomainError):
        MapModel(MapKind.TRIANGULATION, Fraction(12), Fraction(54))
    assert MapModel.of("quad") == QUADRANGULATION


@pytest.mark.parametrize("model,m", [(TRIANGULATION, 2), (TRIANGULATION, 5), (QUADRANGULATION, 2), (QUADRANGULATION, 6)])
def test_oracle_encloses_closed_form(model, m):
    bound = oracle_partition_function(model, m, terms=4000)
    assert bound.lower <= bound.upper
    assert bound.contains(partition_function(model, m))


BOUNDARIES = [(TRIANGULATION, m) for m in range(2, 13)] + [(QUADRANGULATION, m) for m in range(2, 13, 2)]


@pytest.mark.parametrize("model,m", BOUNDARIES)
def test_oracle_encloses_every_small_boundary(model, m):
    assert oracle_partition_function(model, m).contains(partition_function(model, m))


def test_oracle_tightens_with_more_terms():
    coarse = oracle_partition_function(QUADRANGULATION, 4, terms=500)
    fine = oracle_partition_function(QUADRANGULATION, 4, terms=5000)
    assert fine.width < coarse.width


def test_laws_are_normalized(tri_law, quad_law):
    assert tri_law.normalization() == 1
    assert quad_law.normalization() == 1


def test_q_law_heads(tri_law, quad_law):
    assert tri_law.q_inner == Fraction(2, 3)
    assert tri_law.q_side(1) == Fraction(1, 8)
    assert tri_law.q_side(2) == Fraction(1, 48)
    assert tri_law.q_side(3) == Fraction(1, 128)
    assert quad_law.q_inner == Fraction(3, 8)
    assert quad_law.q_side(0) == Fraction(1, 9)
    assert quad_law.q_side(1) == Fraction(1, 9)
    assert quad_law.q_side(2) == quad_law.q_side(3) == Fraction(2, 243)


def test_side_ratio_matches_terms(tri_law):
    for k in range(1, 40):
        assert tri_law.q_side(k + 1) / tri_law.q_side(k) == Fraction(2 * k - 1, 2 * (k + 2))


def test_q_side_rejects_out_of_range(tri_law):
    with pytest.raises(DomainError):
        tri_law.q_side(0)


def test_joint_law(quad_law, tri_law):
    assert quad_law.q_joint(1, 1) == partition_function(QUADRANGULATION, 2) ** 2 / 54
    assert quad_law.joint_mass == Fraction(1, 24)
    with pytest.raises(DomainError):
        quad_law.q_joint(2, 1)
    with pytest.raises(DomainError):
        tri_law.q_joint(1, 1)


def test_realized_mass_approaches_one(quad_law):
    small, large = quad_law.realized_mass(21), quad_law.realized_mass(81)
    assert small < large < 1


def test_moments_triangulation(tri_law):
    moments = law_moments(tri_law)
    assert moments.E_exposed == Fraction(5, 3)
    assert moments.delta == Fraction(2, 3)
    assert moments.eta == Fraction(1, 6)
    assert moments.E_Rr_given_positive == 2
    assert moments.E_left == moments.E_right == Fraction(1, 3)


def test_moments_quadrangulation(quad_law):
    moments = law_moments(quad_law)
    assert moments.E_exposed == 2
    assert moments.delta == 1
    assert moments.eta == Fraction(2, 9)
    assert moments.E_Rr_given_positive == Fraction(9, 4)
    assert moments.E_left == moments.E_right == Fraction(1, 2)


def test_exposed_distribution(tri_law, quad_law):
    assert exposed_distribution(tri_law) == {1: Fraction(1, 3), 2: Fraction(2, 3)}
    assert exposed_distribution(quad_law) == {1: Fraction(3, 8), 2: Fraction(1, 4), 3: Fraction(3, 8)}


@pytest.mark.parametrize("law_name", ["tri_law", "quad_law"])
def test_left_and_right_swallowed_agree(law_name, request):
    law = request.getfixturevalue(law_name)
    left = swallowed_distribution(law, "left", 25)
    right = swallowed_distribution(law, "right", 25)
    assert left == right
    assert sum(left.values()) < 1


def test_swallowed_distribution_rejects_side(tri_law):
    with pytest.raises(DomainError):
        swallowed_distribution(tri_law, "up", 5)


def test_tail_mass_is_closed_form(tri_law):
    head = sum(tri_law.q_side(k) for k in range(1, 51))
    assert tail_mass(tri_law, 50) == Fraction(1, 6) - head
    assert tail_mass(tri_law, 50) > 0


def test_fit_tail_exponent(quad_law, tri_law):
    for law in (tri_law, quad_law):
        fit = fit_tail(law, 200, 2000)
        assert abs(fit.residual_slope) < 0.01
        assert fit.iota > 0


@pytest.mark.parametrize("window", [(5, 100), (50, 50), (50, 55)])
def test_fit_tail_rejects_windows(tri_law, window):
    with pytest.raises(DomainError):
        fit_tail(tri_law, *window)


def test_peeling_law_is_cached():
    assert peeling_law(TRIANGULATION) is peeling_law(TRIANGULATION)


def test_fuss_catalan_numbers():
    assert [fuss_catalan.fuss_catalan(2, n) for n in range(5)] == [1, 1, 2, 5, 14]
    assert [fuss_catalan.fuss_catalan(3, n) for n in range(5)] == [1, 1, 3, 12, 55]
    assert fuss_catalan.critical_point(2) == (sympy.Rational(1, 4), 2)
    assert fuss_catalan.critical_point(3) == (sympy.Rational(4, 27), sympy.Rational(3, 2))


def test_weighted_sum_resummation():
    j = fuss_catalan.j
    assert fuss_catalan.weighted_sum(2, sympy.Integer(1)) == 2
    assert fuss_catalan.as_fraction(fuss_catalan.weighted_sum(2, 1 / (j + 2)) / 4) == Fraction(1, 6)
    with pytest.raises(DomainError):
        fuss_catalan.weighted_sum(2, j)
    with pytest.raises(DomainError):
        fuss_catalan.weighted_sum(2, 1 / (j + 1) ** 2)
    with pytest.raises(DomainError):
        fuss_catalan.as_fraction(sympy.sqrt(2))


def test_fit_tail_is_stable_when_window_doubles(tri_law, quad_law):
    for law in (tri_law, quad_law):
        narrow, wide = fit_tail(law, 50, 500), fit_tail(law, 100, 1000)
        assert wide.iota == pytest.approx(narrow.iota, rel=0.01)
        assert wide.side_tail_constant == pytest.approx(narrow.side_tail_constant, rel=0.01)


def test_q_side_extends_safely_across_threads(tri_law):
    law = dataclasses.replace(tri_law, _side_table=[], _side_lock=threading.Lock())
    ks = list(range(1, 1500, 7)) * 4
    with ThreadPoolExecutor(max_workers=8) as pool:
        values = list(pool.map(law.q_side, ks))
    assert values == [tri_law.q_side(k) for k in ks]
    assert law._side_table == [tri_law.side_term(1 + i) for i in range(len(law._side_table))]
