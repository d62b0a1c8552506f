"""Irrational rotation numbers given exactly: quadratic surds or continued-fraction prefixes."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath

from .errors import NotIrrational

NAMED = {
    "golden": (-1, 1, 5, 2),
    "sqrt2m1": (-1, 1, 2, 1),
}

_QUAD = re.compile(r"^\(?\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*\*?\s*(?:√|sqrt)\s*\(?\s*(\d+)\s*\)?\s*\)?\s*/\s*([+-]?\d+)$")


@dataclass(frozen=True)
class ThetaSpec:
    """theta in (0, 1) as a surd (a + b sqrt(d)) / c, or as a finite continued-fraction prefix.

    For a prefix [a1, a2, ...] the value is 1/(a1 + 1/(a2 + ...)).
    """
    text: str
    surd: Optional[Tuple[int, int, int, int]] = None
    cf: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if (self.surd is None) == (self.cf is None):
            raise ValueError("exactly one of surd / cf must be given")
        if self.surd is not None:
            a, b, d, c = self.surd
            if b == 0 or c == 0 or d < 2 or math.isqrt(d) ** 2 == d:
                raise NotIrrational("%s is rational" % self.text)
        else:
            if not self.cf or any(x < 1 for x in self.cf):
                raise ValueError("continued-fraction terms must be positive integers")
        v = float(self.value(30))
        if not 0 < v < 1:
            raise ValueError("theta must lie in (0, 1), got %s" % v)

    @property
    def is_prefix(self) -> bool:
        return self.cf is not None

    def value(self, dps: int = 50) -> mpmath.mpf:
        with mpmath.workdps(dps):
            if self.surd is not None:
                a, b, d, c = self.surd
                return (a + b * mpmath.sqrt(d)) / c
            x = _cf_value(self.cf)
            return mpmath.mpf(x.numerator) / x.denominator

    def multiplier(self) -> complex:
        """e^(2 pi i theta), computed in extended precision and rounded once."""
        with mpmath.workdps(60):
            z = mpmath.expjpi(2 * self.value(60))
            return complex(z)

    def partial_quotients(self, n: int) -> List[int]:
        if self.cf is not None:
            return list(self.cf[:n])
        pre, per = surd_continued_fraction(*self.surd)
        out = list(pre[1:])
        while len(out) < n:
            out.extend(per)
        return out[:n]

    def __str__(self) -> str:
        return self.text


def _cf_value(terms) -> Fraction:
    x = Fraction(0)
    for a in reversed(terms):
        x = 1 / (a + x)
    return x


def parse_theta(text: str) -> ThetaSpec:
    s = text.strip()
    if s in NAMED:
        return ThetaSpec(s, surd=NAMED[s])
    if s.startswith("cf:"):
        body = s[3:].strip().strip("[]")
        terms = tuple(int(x) for x in body.split(",") if x.strip())
        return ThetaSpec(s, cf=terms)
    if s.startswith("quad:"):
        m = _QUAD.match(s[5:].strip())
        if not m:
            raise ValueError("cannot parse surd %r; expected quad:(a+b√d)/c" % s)
        a, sign, b, d, c = m.groups()
        b = int(b) if b else 1
        if sign == "-":
            b = -b
        return ThetaSpec(s, surd=(int(a), b, int(d), int(c)))
    if re.fullmatch(r"[+-]?\d+\s*/\s*\d+", s) or re.fullmatch(r"[+-]?\d+", s):
        raise NotIrrational("%s is rational; theta must be irrational" % s)
    raise ValueError("theta must be golden, sqrt2m1, cf:[...] or quad:(a+b√d)/c; got %r "
                     "(floats are not accepted)" % s)


def surd_continued_fraction(a: int, b: int, d: int, c: int) -> Tuple[List[int], List[int]]:
    """Exact continued fraction of (a + b sqrt(d)) / c as (preperiod, period).

    The preperiod includes the integer part as its first term.
    """
    # rewrite as (P + sqrt(D)) / Q with Q | D - P^2
    D = b * b * d * c * c
    P, Q = a * abs(c), c * abs(c)
    if b < 0:
        P, Q = -P, -Q
    r = math.isqrt(D)
    seen = {}
    terms = []
    while (P, Q) not in seen:
        seen[(P, Q)] = len(terms)
        if Q > 0:
            q = (P + r) // Q
        else:
            q = -((P + r) // -Q) - 1
        terms.append(q)
        P = q * Q - P
        Q = (D - P * P) // Q
    start = seen[(P, Q)]
    return terms[:start], terms[start:]


@dataclass(frozen=True)
class BoundedVerdict:
    exact: bool                 # True: eventual periodicity proved; False: finite prefix only
    bounded: bool               # exact: bounded type; prefix: all seen terms <= bound
    max_quotient: int
    terms_examined: int
    period: Tuple[int, ...] = ()

    def describe(self) -> str:
        if self.exact:
            head = "bounded type" if self.bounded else "bounded type, but above the requested bound"
            return "%s (periodic continued fraction, max partial quotient %d)" % (head, self.max_quotient)
        head = "bounded so far" if self.bounded else "exceeds the bound"
        return "%s, max partial quotient = %d over %d terms" % (
            head, self.max_quotient, self.terms_examined)


def is_bounded_type(theta: ThetaSpec, bound: Optional[int] = None, depth: int = 64) -> BoundedVerdict:
    if theta.surd is not None:
        pre, per = surd_continued_fraction(*theta.surd)
        qs = pre[1:] + per
        m = max(qs)
        ok = bound is None or m <= bound
        return BoundedVerdict(True, ok, m, len(qs), tuple(per))
    terms = theta.cf[:depth]
    m = max(terms)
    return BoundedVerdict(False, bound is None or m <= bound, m, len(terms))
