"""Exact angles on R/Z under the doubling map.

Angles are reduced fractions with arbitrary-precision integers; nothing in
this module touches floating point except ``Angle.__float__``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, List, Sequence, Tuple, Union

import gmpy2
from sympy.ntheory import n_order

from .errors import NotACycle, NotRigidRotation


@total_ordering
@dataclass(frozen=True, init=False)
class Angle:
    numerator: int
    denominator: int

    def __init__(self, numerator: int, denominator: int = 1):
        if denominator <= 0:
            raise ValueError("denominator must be positive")
        n = int(numerator) % int(denominator)
        g = int(gmpy2.gcd(n, denominator)) if n else int(denominator)
        object.__setattr__(self, "numerator", n // g)
        object.__setattr__(self, "denominator", int(denominator) // g)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        text = text.strip()
        if "/" in text:
            a, b = text.split("/")
            return cls(int(a), int(b))
        if text.startswith(("0.", "1.")) or "." in text:
            raise ValueError("angles are exact fractions a/b, got %r" % text)
        return cls(int(text), 1)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "Angle":
        return cls(x.numerator, x.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __lt__(self, other: "Angle") -> bool:
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __neg__(self) -> "Angle":
        return Angle(-self.numerator, self.denominator)

    def __str__(self) -> str:
        return "%d/%d" % (self.numerator, self.denominator)

    def __repr__(self) -> str:
        return "Angle(%d/%d)" % (self.numerator, self.denominator)


AngleLike = Union[Angle, str, Fraction, Tuple[int, int]]


def as_angle(x: AngleLike) -> Angle:
    if isinstance(x, Angle):
        return x
    if isinstance(x, str):
        return Angle.parse(x)
    if isinstance(x, Fraction):
        return Angle.from_fraction(x)
    if isinstance(x, tuple):
        return Angle(*x)
    raise TypeError("cannot interpret %r as an angle" % (x,))


@dataclass(frozen=True)
class RotationNumber:
    q: int
    p: int

    def __post_init__(self):
        if self.p < 1 or not 0 <= self.q < self.p or math.gcd(self.q, self.p) != 1:
            raise ValueError("rotation number must satisfy 0 <= q < p, gcd(q, p) = 1; got %d/%d"
                             % (self.q, self.p))

    @classmethod
    def parse(cls, text: str) -> "RotationNumber":
        text = text.strip()
        if "/" not in text:
            if text == "0":
                return cls(0, 1)
            raise ValueError("rotation number must be given as q/p, got %r" % text)
        q, p = text.split("/")
        return cls(int(q), int(p))

    def as_fraction(self) -> Fraction:
        return Fraction(self.q, self.p)

    def __float__(self) -> float:
        return self.q / self.p

    def __str__(self) -> str:
        return "%d/%d" % (self.q, self.p)


@dataclass(frozen=True)
class BinarySequence:
    """The word ``0.preperiod (period)^infinity``.

    An empty period means the expansion terminates (trailing zeros).
    """
    preperiod: str = ""
    period: str = ""

    def __post_init__(self):
        for w in (self.preperiod, self.period):
            if w.count("0") + w.count("1") != len(w):
                raise ValueError("binary words use only 0 and 1")

    @classmethod
    def _trusted(cls, preperiod: str, period: str) -> "BinarySequence":
        # skips symbol validation for words produced by format(.., "b")
        obj = object.__new__(cls)
        object.__setattr__(obj, "preperiod", preperiod)
        object.__setattr__(obj, "period", period)
        return obj

    def canonical(self) -> "BinarySequence":
        pre, per = self.preperiod, self.period
        if per and per.count("0") == len(per):
            per = ""
        if not per:
            return BinarySequence(pre.rstrip("0"), "")
        per = _primitive_root(per)
        while pre and pre[-1] == per[-1]:
            pre, per = pre[:-1], per[-1] + per[:-1]
        return BinarySequence(pre, per)

    def is_canonical(self) -> bool:
        return self == self.canonical()

    @property
    def ones_tail(self) -> bool:
        """True for the tail-of-ones twin of a dyadic angle (including 0.111... = 1)."""
        return bool(self.period) and self.period.count("1") == len(self.period)

    def digits(self, n: int) -> str:
        """First n symbols."""
        out = self.preperiod[:n]
        if len(out) < n:
            per = self.period or "0"
            need = n - len(out)
            out += (per * (need // len(per) + 1))[:need]
        return out

    def shift(self, n: int = 1) -> "BinarySequence":
        """Drop the first n symbols (the doubling map on words)."""
        pre, per = self.preperiod, self.period
        if n <= len(pre):
            return BinarySequence(pre[n:], per).canonical()
        if not per:
            return BinarySequence("", "")
        r = (n - len(pre)) % len(per)
        return BinarySequence("", per[r:] + per[:r]).canonical()

    def prepend(self, word: str) -> "BinarySequence":
        return BinarySequence(word + self.preperiod, self.period).canonical()

    def __str__(self) -> str:
        if not self.period:
            return "0." + (self.preperiod or "0")
        return "0.%s(%s)" % (self.preperiod, self.period)


def _primitive_root(word: str) -> str:
    return word[:(word + word).find(word, 1)]


def double(t: Angle) -> Angle:
    return Angle(2 * t.numerator, t.denominator)


def doubling_orbit(t: Angle, steps: int) -> List[Angle]:
    out = [t]
    for _ in range(steps):
        out.append(double(out[-1]))
    return out


def negate(t: Angle) -> Angle:
    """t -> 1 - t on R/Z, with 0 fixed."""
    return -t


def _two_adic_split(d: int) -> Tuple[int, int]:
    m = (d & -d).bit_length() - 1
    return m, d >> m


def doubling_period(odd_denominator: int) -> int:
    """Multiplicative order of 2 modulo an odd denominator (1 for denominator 1)."""
    if odd_denominator == 1:
        return 1
    return int(n_order(2, odd_denominator))


def preperiod_and_period(t: Angle) -> Tuple[int, int]:
    """(preperiod length, period length) of t under doubling."""
    m, b = _two_adic_split(t.denominator)
    return m, doubling_period(b)


def binary_expansion(t: Angle, twin: bool = False) -> BinarySequence:
    """Canonical expansion; ``twin=True`` gives the tail-of-ones form of a dyadic angle."""
    m, b = _two_adic_split(t.denominator)
    n = t.numerator
    if b == 1:
        pre = format(n, "0%db" % m) if m else ""
        seq = BinarySequence(pre.rstrip("0"), "")
        if not twin:
            return seq
        if n == 0:
            return BinarySequence("", "1")
        return BinarySequence(seq.preperiod[:-1] + "0", "1")
    whole, r = divmod(n, b)
    k = doubling_period(b)
    q = (r << k) - r
    q //= b
    pre = format(whole, "0%db" % m) if m else ""
    # already minimal: preperiod = 2-adic valuation, period = order of 2
    return BinarySequence._trusted(pre, format(q, "0%db" % k))


def _periodic_value(q: int, k: int) -> Tuple[int, int]:
    """Reduced (r, b) with r/b = q/(2^k - 1).

    Tries rational reconstruction from a truncated prefix first and verifies it
    exactly; falls back to a full gcd.
    """
    m = (1 << k) - 1
    if q == 0:
        return 0, 1
    bits = 64
    while bits < k:
        # truncation error < 2^-bits; denominators <= 2^((bits-2)/2) are then unique
        approx = Fraction(q >> (k - bits), 1 << bits)
        c = approx.limit_denominator(1 << ((bits - 2) // 2))
        if q * c.denominator == c.numerator * m:
            return c.numerator, c.denominator
        bits *= 2
    g = int(gmpy2.gcd(q, m))
    return q // g, m // g


def from_binary(s: BinarySequence) -> Angle:
    """Exact value of an eventually periodic word.

    The all-ones tail is summed honestly, so ``0.(1)`` gives 1, which reduces to
    Angle 0/1; check ``s.ones_tail`` to detect that source.
    """
    pre, per = s.preperiod, s.period
    m = len(pre)
    whole = int(pre, 2) if pre else 0
    if not per:
        return Angle(whole, 1 << m)
    k = len(per)
    r, b = _periodic_value(int(per, 2), k)
    return Angle(whole * b + r, b << m)


def sigma_word(nu: RotationNumber) -> str:
    """Digit rule: sigma_j = 1 iff {j q / p} < q / p, for j = 1..p."""
    q, p = nu.q, nu.p
    return "".join("1" if (j * q) % p < q else "0" for j in range(1, p + 1))


def parabolic_cycle(nu: RotationNumber) -> List[Angle]:
    """The doubling cycle with combinatorial rotation number q/p, sorted ascending.

    Satisfies double(cycle[i]) == cycle[(i + q) % p].
    """
    t1 = from_binary(BinarySequence("", sigma_word(nu)).canonical())
    cycle = sorted(doubling_orbit(t1, nu.p - 1))
    return cycle


def cycle_rotation_number(cycle: Iterable[Angle]) -> RotationNumber:
    pts = sorted(set(cycle))
    if not pts:
        raise NotACycle("empty set")
    index = {t: i for i, t in enumerate(pts)}
    p = len(pts)
    images = []
    for t in pts:
        d = double(t)
        if d not in index:
            raise NotACycle("%s doubles to %s, outside the set" % (t, d))
        images.append(index[d])
    k = images[0] % p
    for i, j in enumerate(images):
        if j != (i + k) % p:
            raise NotRigidRotation("doubling does not act as a rotation of the circular order")
    if math.gcd(k, p) != 1:
        raise NotACycle("set is a union of %d cycles" % math.gcd(k, p))
    return RotationNumber(k, p)


def periodic_cycles(p: int) -> List[List[Angle]]:
    """All doubling cycles of exact period p, each sorted (brute force)."""
    m = (1 << p) - 1
    seen = set()
    cycles = []
    for a in range(m if p > 1 else 1):
        if a in seen:
            continue
        orbit = [a]
        x = (2 * a) % m if m > 1 else 0
        while x != a:
            orbit.append(x)
            x = (2 * x) % m
        seen.update(orbit)
        if len(orbit) == p:
            cycles.append(sorted(Angle(x, m) if m > 1 else Angle(0) for x in orbit))
    return cycles


def brute_force_parabolic_cycle(nu: RotationNumber) -> List[Angle]:
    """Oracle: enumerate all period-p cycles and keep the one rotating by q/p."""
    hits = []
    for cyc in periodic_cycles(nu.p):
        try:
            rho = cycle_rotation_number(cyc)
        except (NotRigidRotation, NotACycle):
            continue
        if rho == nu:
            hits.append(cyc)
    if len(hits) != 1:
        raise NotACycle("expected exactly one cycle with rotation number %s, found %d"
                        % (nu, len(hits)))
    return hits[0]


def rotation_numbers(max_p: int) -> List[RotationNumber]:
    out = [RotationNumber(0, 1)]
    for p in range(2, max_p + 1):
        out.extend(RotationNumber(q, p) for q in range(1, p) if math.gcd(q, p) == 1)
    return out


def format_angles(angles: Sequence[Angle]) -> str:
    return " ".join(str(t) for t in angles)
