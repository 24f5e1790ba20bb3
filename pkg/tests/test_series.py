from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dimerlab.series import RationalSeries, log1p_series

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def random_series(rnd: random.Random, order: int, c0: int | None = None) -> RationalSeries:
    cs = [Fraction(rnd.randint(-9, 9), rnd.randint(1, 9)) for _ in range(order + 1)]
    if c0 is not None:
        cs[0] = Fraction(c0)
    return RationalSeries(cs)


def as_sympy(s: RationalSeries, x):
    return sum(sympy.Rational(c.numerator, c.denominator) * x**k for k, c in enumerate(s))


def test_basic_arithmetic():
    a = RationalSeries([1, 2, 3])
    b = RationalSeries([0, 1], 2)
    assert (a + b).coeffs == (1, 3, 3)
    assert (a * b).coeffs == (0, 1, 2)
    assert (a - a).valuation() is None
    assert (a * a.reciprocal()).coeffs == (1, 0, 0)
    assert (a / 2).coeffs == (Fraction(1, 2), 1, Fraction(3, 2))
    assert (a**2).coeffs == (1, 4, 10)
    assert (2 + a).coeffs == (3, 2, 3)
    assert (1 - b).coeffs == (1, -1, 0)


def test_mixed_orders_truncate():
    a = RationalSeries([1, 1, 1, 1])
    b = RationalSeries([1, 1])
    assert (a * b).order == 1


def test_calculus():
    a = RationalSeries([5, 1, 2, 3])
    assert a.derivative().coeffs == (1, 4, 9)
    assert a.derivative().integral().coeffs == (0, 1, 2, 3)
    assert a.x_derivative().coeffs == (0, 1, 4, 9)
    assert RationalSeries([0, 1, 2]).div_x().coeffs == (1, 2)
    assert RationalSeries([1, 2]).mul_x().coeffs == (0, 1, 2)
    with pytest.raises(ValueError):
        a.div_x()


def test_log_exp_known():
    x = sympy.Symbol("x")
    order = 10
    s = log1p_series(order)
    assert list(s) == [sympy.series(sympy.log(1 + x), x, 0, order + 1).coeff(x, k) for k in range(order + 1)]
    e = s.exp()
    assert e.coeffs == (1, 1) + (0,) * (order - 1)


def test_compose_against_sympy():
    rnd = random.Random(5)
    x = sympy.Symbol("x")
    for _ in range(10):
        outer = random_series(rnd, 6)
        inner = random_series(rnd, 6, c0=0)
        got = outer.compose(inner)
        want = sympy.expand(as_sympy(outer, as_sympy(inner, x)))
        assert list(got) == [want.coeff(x, k) for k in range(7)]


def test_revert_against_sympy():
    # tan has inverse atan
    x = sympy.Symbol("x")
    tan = sympy.series(sympy.tan(x), x, 0, 12).removeO()
    s = RationalSeries([Fraction(int(sympy.fraction(tan.coeff(x, k))[0]), int(sympy.fraction(tan.coeff(x, k))[1])) for k in range(12)])
    atan = sympy.series(sympy.atan(x), x, 0, 12).removeO()
    assert list(s.revert()) == [atan.coeff(x, k) for k in range(12)]


def test_hundred_random_round_trips():
    rnd = random.Random(100)
    for _ in range(100):
        order = rnd.randint(2, 12)
        s = random_series(rnd, order, c0=1)
        assert s.log().exp() == s
        t = random_series(rnd, order, c0=0)
        if t[1] == 0:
            t = t + RationalSeries([0, 1], order)
        inv = t.revert()
        assert t.compose(inv) == RationalSeries.variable(order)
        assert inv.compose(t) == RationalSeries.variable(order)


@settings(max_examples=50, deadline=None)
@given(st.lists(fractions, min_size=2, max_size=9))
def test_exp_log_property(cs):
    s = RationalSeries([1] + cs)
    assert s.log().exp() == s
    z = RationalSeries([0] + cs)
    assert z.exp().log() == z


@settings(max_examples=50, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=8), fractions.filter(lambda f: f != 0))
def test_revert_property(cs, lead):
    s = RationalSeries([0, lead] + cs)
    assert s.compose(s.revert()) == RationalSeries.variable(s.order)


def test_domain_errors():
    with pytest.raises(ValueError):
        RationalSeries([2, 1]).log()
    with pytest.raises(ValueError):
        RationalSeries([1, 1]).exp()
    with pytest.raises(ValueError):
        RationalSeries([0, 0, 1]).revert()
    with pytest.raises(ValueError):
        RationalSeries([1, 1]).revert()
    with pytest.raises(ValueError):
        RationalSeries([1, 1]).compose(RationalSeries([1, 1]))
    with pytest.raises(ZeroDivisionError):
        RationalSeries([0, 1]).reciprocal()
    with pytest.raises(ValueError):
        RationalSeries([])
