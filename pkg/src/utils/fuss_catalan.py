"""
Exact resummation of Fuss-Catalan series at their radius of convergence.

The generating function ``F(x) = 1 + x F(x)^d`` of d-ary trees is
parametrized by ``x = (tau - 1) / tau^d``, ``F = tau``. Sums of the form
``sum_j F_j x_c^j R(j)`` with ``R`` a rational function decaying at least like
``1/j`` reduce, after partial fractions, to integrals of rational functions of
``tau``, which sympy evaluates exactly.
"""
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Tuple

import sympy

from core.exceptions import DomainError

j = sympy.Symbol("j", integer=True, nonnegative=True)
_tau = sympy.Symbol("tau", positive=True)


def fuss_catalan(d: int, n: int) -> int:
    """Number of d-ary trees with n inner nodes: C(d n, n) / ((d - 1) n + 1)."""
    return comb(d * n, n) // ((d - 1) * n + 1)


@lru_cache(maxsize=None)
def critical_point(d: int) -> Tuple[sympy.Rational, sympy.Rational]:
    """Radius of convergence x_c and F(x_c) for d-ary trees."""
    if d < 2:
        raise DomainError(f"tree arity must be at least 2, got {d}")
    tau_c = sympy.Rational(d, d - 1)
    return (tau_c - 1) / tau_c**d, tau_c


@lru_cache(maxsize=None)
def _moment_integral(d: int, s: sympy.Rational) -> sympy.Expr:
    # sum_j F_j x^j / (j + s) = x^{-s} * int_0^x t^{s-1} F(t) dt at x = x_c
    x_c, tau_c = critical_point(d)
    t = (_tau - 1) / _tau**d
    integrand = sympy.cancel(t ** (s - 1) * _tau * sympy.diff(t, _tau))
    integral = sympy.integrate(integrand, (_tau, 1, tau_c))
    return sympy.simplify(x_c ** (-s) * integral)


def weighted_sum(d: int, weight: sympy.Expr) -> sympy.Expr:
    """
    Exact value of ``sum_{j>=0} F_j x_c^j weight(j)``.

    Args:
        d: Tree arity
        weight: Rational function of the module symbol ``j`` whose partial
            fractions contain only a constant and simple poles at ``j = -s``
            with ``s > 0``

    Returns:
        A sympy expression, rational whenever every integral is

    Raises:
        DomainError: If the weight has polynomial growth or repeated poles
    """
    _, tau_c = critical_point(d)
    total = sympy.Integer(0)
    for term in sympy.Add.make_args(sympy.apart(sympy.together(weight), j)):
        coeff, rest = term.as_independent(j, as_Add=False)
        if rest == 1:
            total += coeff * tau_c
            continue
        numerator, denominator = sympy.fraction(sympy.together(rest))
        if numerator.has(j) or not denominator.has(j):
            raise DomainError(f"unsupported term {term} in weighted Fuss-Catalan sum")
        denominator = sympy.Poly(denominator, j)
        if denominator.degree() != 1:
            raise DomainError(f"unsupported term {term} in weighted Fuss-Catalan sum")
        lead, shift = denominator.all_coeffs()
        coeff = coeff * numerator
        s = sympy.Rational(shift) / lead
        if s <= 0:
            raise DomainError(f"pole at j = {-s} is not allowed")
        total += coeff / lead * _moment_integral(d, s)
    return sympy.simplify(total)


def as_fraction(value: sympy.Expr) -> Fraction:
    """Convert a sympy rational to ``Fraction``; anything irrational is an error."""
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise DomainError(f"expected an exact rational, got {value}")
    return Fraction(int(value.p), int(value.q))
