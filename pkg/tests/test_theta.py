import math

import mpmath
import pytest

from mating.errors import NotIrrational
from mating.theta import is_bounded_type, parse_theta, surd_continued_fraction


def cf_oracle(x, n):
    """Plain continued fraction of a high-precision real."""
    out = []
    with mpmath.workdps(200):
        for _ in range(n):
            x = 1 / x
            a = int(mpmath.floor(x))
            out.append(a)
            x -= a
    return out


def test_golden_is_bounded():
    v = is_bounded_type(parse_theta("golden"))
    assert v.exact and v.bounded and v.max_quotient == 1 and v.period == (1,)


def test_sqrt2_minus_one():
    th = parse_theta("sqrt2m1")
    v = is_bounded_type(th)
    assert v.exact and v.bounded and v.period == (2,)
    assert th.partial_quotients(6) == [2] * 6


def test_bound_verdict_text():
    over = is_bounded_type(parse_theta("cf:[1,2,30,2]"), bound=10)
    assert not over.bounded and over.describe().startswith("exceeds the bound")
    under = is_bounded_type(parse_theta("cf:[1,2,3]"), bound=10)
    assert under.bounded and under.describe().startswith("bounded so far")
    surd = is_bounded_type(parse_theta("quad:(1+sqrt(5))/7"), bound=10)
    assert surd.exact and not surd.bounded and "above the requested bound" in surd.describe()


@pytest.mark.parametrize("text", ["22/7", "3", "1/2"])
def test_rationals_rejected(text):
    with pytest.raises(NotIrrational):
        parse_theta(text)


def test_floats_rejected():
    with pytest.raises(ValueError):
        parse_theta("0.618")


@pytest.mark.parametrize("a,b,d,c", [(-1, 1, 5, 2), (-1, 1, 2, 1), (0, 1, 7, 3), (-2, 1, 13, 3), (1, -1, 3, 1)])
def test_surd_expansion_matches_oracle(a, b, d, c):
    with mpmath.workdps(200):
        x = (a + b * mpmath.sqrt(d)) / c
        x -= mpmath.floor(x)
    pre, per = surd_continued_fraction(a, b, d, c)
    terms = pre[1:] + per * 30
    assert terms[:30] == cf_oracle(x, 30)


def test_quad_grammar():
    th = parse_theta("quad:(-1+sqrt(5))/2")
    assert abs(float(th.value()) - (math.sqrt(5) - 1) / 2) < 1e-15
    th = parse_theta("quad:(-1+√5)/2")
    assert is_bounded_type(th).bounded


def test_prefix_verdict():
    th = parse_theta("cf:[1,2,30,2]")
    v = is_bounded_type(th, bound=10)
    assert not v.exact and not v.bounded and v.max_quotient == 30
    assert "bounded so far" in is_bounded_type(parse_theta("cf:[1,2,3]")).describe()


def test_multiplier_is_correctly_rounded():
    th = parse_theta("golden")
    with mpmath.workdps(60):
        ref = mpmath.expjpi(mpmath.sqrt(5) - 1)
    m = th.multiplier()
    assert abs(m - complex(ref)) < 2e-16
