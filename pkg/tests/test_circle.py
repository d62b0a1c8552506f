import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mating.circle import (Angle, BinarySequence, RotationNumber, binary_expansion,
                           brute_force_parabolic_cycle, cycle_rotation_number, double,
                           doubling_orbit, from_binary, negate, parabolic_cycle,
                           preperiod_and_period, rotation_numbers, sigma_word)
from mating.errors import NotACycle, NotRigidRotation

FOOTNOTE_CYCLE = [Angle(11, 31), Angle(13, 31), Angle(21, 31), Angle(22, 31), Angle(26, 31)]


def oracle_cycle(q, p):
    """Independent oracle: walk every orbit of a/(2^p - 1) and read the rotation
    number off the circular position of the image of the smallest point."""
    if p == 1:
        return [Fraction(0)]
    m = 2 ** p - 1
    found = []
    done = set()
    for a in range(1, m):
        if a in done:
            continue
        orb = [a]
        while (2 * orb[-1]) % m != a:
            orb.append((2 * orb[-1]) % m)
        done.update(orb)
        if len(orb) != p:
            continue
        pts = sorted(orb)
        pos = {x: i for i, x in enumerate(pts)}
        shift = (pos[(2 * pts[0]) % m]) % p
        if all(pos[(2 * x) % m] == (pos[x] + shift) % p for x in pts) and shift == q:
            found.append([Fraction(x, m) for x in pts])
    assert len(found) == 1
    return found[0]


def test_angle_normalises():
    assert Angle(22, 62) == Angle(11, 31)
    assert Angle(31, 31) == Angle(0, 1)
    assert str(Angle(-1, 3)) == "2/3"
    with pytest.raises(ValueError):
        Angle(1, 0)
    with pytest.raises(ValueError):
        Angle.parse("0.5")


def test_double_examples():
    assert double(Angle(11, 31)) == Angle(22, 31)
    assert double(Angle(0)) == Angle(0)
    assert double(Angle(22, 31)) == Angle(13, 31)


def test_negate_fixes_zero():
    assert negate(Angle(0)) == Angle(0)
    assert negate(Angle(11, 31)) == Angle(20, 31)


@pytest.mark.parametrize("t,pre,per", [
    (Angle(11, 31), "", "01011"),
    (Angle(22, 31), "", "10110"),
    (Angle(1, 2), "1", ""),
    (Angle(1, 6), "0", "01"),
    (Angle(0), "", ""),
])
def test_binary_expansion_examples(t, pre, per):
    s = binary_expansion(t)
    assert (s.preperiod, s.period) == (pre, per)
    assert from_binary(s) == t


def test_dyadic_twin():
    twin = binary_expansion(Angle(1, 2), twin=True)
    assert (twin.preperiod, twin.period) == ("0", "1")
    assert from_binary(twin) == Angle(1, 2)


def test_all_ones_normalises_to_zero():
    s = BinarySequence("", "1")
    assert s.ones_tail
    assert from_binary(s) == Angle(0)


def test_canonical_form_is_unique():
    b = BinarySequence("", "01")
    assert BinarySequence("01", "01").canonical() == b
    assert BinarySequence("0", "10").canonical() == b
    assert BinarySequence("", "0101").canonical() == BinarySequence("", "01")


def test_round_trip_1000_random():
    rng = random.Random(7)
    for _ in range(1000):
        b = rng.randint(1, 10 ** 6)
        t = Angle(rng.randrange(b), b)
        assert from_binary(binary_expansion(t)) == t


@given(st.integers(min_value=1, max_value=10 ** 9), st.integers(min_value=0))
def test_double_denominator_divides(b, a):
    t = Angle(a, b)
    assert t.denominator % double(t).denominator == 0


@given(st.integers(min_value=1, max_value=10 ** 6), st.integers(min_value=0))
def test_expansion_shift_is_doubling(b, a):
    t = Angle(a, b)
    assert from_binary(binary_expansion(t).shift(1)) == double(t)


@given(st.text(alphabet="01", max_size=12), st.text(alphabet="01", min_size=1, max_size=12))
def test_words_round_trip(pre, per):
    s = BinarySequence(pre, per).canonical()
    t = from_binary(s)
    if s.ones_tail:
        # 0.w111... equals the terminating twin, which the expansion prefers
        assert from_binary(binary_expansion(t, twin=True)) == t
    else:
        assert binary_expansion(t) == s


def test_preperiod_and_period():
    assert preperiod_and_period(Angle(11, 31)) == (0, 5)
    assert preperiod_and_period(Angle(11, 124)) == (2, 5)
    assert preperiod_and_period(Angle(1, 8)) == (3, 1)


def test_parabolic_cycle_footnote():
    cyc = parabolic_cycle(RotationNumber(3, 5))
    assert cyc == FOOTNOTE_CYCLE
    for i, t in enumerate(cyc):
        assert double(t) == cyc[(i + 3) % 5]


def test_parabolic_cycle_small_cases():
    assert parabolic_cycle(RotationNumber(0, 1)) == [Angle(0)]
    assert parabolic_cycle(RotationNumber(1, 2)) == [Angle(1, 3), Angle(2, 3)]


def test_sigma_word_is_expansion_of_first_angle():
    assert sigma_word(RotationNumber(3, 5)) == "01011"


def test_cycle_rotation_number_examples():
    assert cycle_rotation_number(FOOTNOTE_CYCLE) == RotationNumber(3, 5)
    assert cycle_rotation_number([Angle(0)]) == RotationNumber(0, 1)
    assert cycle_rotation_number([Angle(1, 3), Angle(2, 3)]) == RotationNumber(1, 2)
    with pytest.raises(NotACycle):
        cycle_rotation_number([Angle(1, 3)])
    # union of both period-3 cycles: invariant, but not a single rotation
    with pytest.raises((NotRigidRotation, NotACycle)):
        cycle_rotation_number([Angle(1, 7), Angle(2, 7), Angle(4, 7), Angle(3, 7), Angle(6, 7), Angle(5, 7)])


@pytest.mark.parametrize("nu", rotation_numbers(12), ids=str)
def test_cycle_matches_oracles(nu):
    cyc = parabolic_cycle(nu)
    assert [t.as_fraction() for t in cyc] == oracle_cycle(nu.q, nu.p)
    assert cyc == brute_force_parabolic_cycle(nu)
    assert cycle_rotation_number(cyc) == nu
    for i, t in enumerate(cyc):
        assert double(t) == cyc[(i + nu.q) % nu.p]
        assert ((2 ** nu.p - 1) % t.denominator == 0) or t == Angle(0)


def test_large_period_exact():
    nu = RotationNumber(37, 80)
    cyc = parabolic_cycle(nu)
    assert len(cyc) == 80
    assert all((2 ** 80 - 1) % t.denominator == 0 for t in cyc)
    assert doubling_orbit(cyc[0], 80)[-1] == cyc[0]


def test_rotation_number_validation():
    with pytest.raises(ValueError):
        RotationNumber(2, 4)
    with pytest.raises(ValueError):
        RotationNumber.parse("0.6")
    assert RotationNumber.parse("3/5") == RotationNumber(3, 5)
