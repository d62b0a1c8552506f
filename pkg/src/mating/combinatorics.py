"""Symbolic dynamics of the two quadratic polynomials.

Drops are named by addresses, marked Julia points by their itineraries (equal to
the binary expansions of their external angles), and the mating's gluing by
ray-equivalence classes of angles. Nothing here touches floating point except
when an omega-tailed angle is turned into a number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

from .circle import (Angle, BinarySequence, RotationNumber, binary_expansion, double,
                     from_binary, negate, parabolic_cycle, preperiod_and_period)
from .errors import NotAdmissible, OmegaUnavailable, RootDisk, Unresolved


# -- addresses --------------------------------------------------------------

@dataclass(frozen=True)
class SiegelAddress:
    """Drop U_{i1 i2 ... ik} of the Siegel polynomial; the empty address is the disk itself."""
    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(i < 1 for i in self.indices):
            raise NotAdmissible("Siegel address indices are positive, got %r" % (self.indices,))

    @property
    def generation(self) -> int:
        return len(self.indices)

    @property
    def depth(self) -> int:
        """Number of iterates taking the drop onto the disk."""
        return sum(self.indices)

    def parent(self) -> "SiegelAddress":
        if not self.indices:
            raise RootDisk("the Siegel disk has no parent")
        return SiegelAddress(self.indices[:-1])

    def __str__(self) -> str:
        return "U_(%s)" % ",".join(map(str, self.indices))


def apply_map_address_siegel(a: SiegelAddress) -> SiegelAddress:
    if not a.indices:
        raise RootDisk("the Siegel disk is invariant")
    first, rest = a.indices[0], a.indices[1:]
    if first == 1:
        return SiegelAddress(rest)
    return SiegelAddress((first - 1,) + rest)


@dataclass(frozen=True)
class ParabolicAddress:
    """Drop of the parabolic polynomial.

    ``markers[s]`` is a 0/1 word whose length is fixed by ``indices[s]`` through
    admissibility. ``branch`` is i_k in 1..p-1 for k >= 1; for k = 0 it is the
    index i0 in 0..p-1 of an immediate basin.
    """
    p: int
    indices: Tuple[int, ...] = ()
    markers: Tuple[str, ...] = ()
    branch: int = 0

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "markers", tuple(str(m) for m in self.markers))
        check_admissible(self)

    @property
    def generation(self) -> int:
        return len(self.indices)

    @property
    def depth(self) -> int:
        return sum(self.indices)

    def marker_lengths(self) -> Tuple[int, ...]:
        return tuple(len(m) for m in self.markers)

    def admits_child(self, iota: int) -> bool:
        # a child's first new index is congruent to the parent's branch
        return self.generation > 0 and iota % self.p == self.branch % self.p

    def __str__(self) -> str:
        if not self.indices:
            return "U_0^(%d)" % self.branch
        ms = ",".join(m or "-" for m in self.markers)
        return "U_(%s)^{%s; %d}" % (",".join(map(str, self.indices)), ms, self.branch)


def check_admissible(a: ParabolicAddress) -> None:
    p = a.p
    if p < 2:
        raise NotAdmissible("parabolic addresses need p >= 2")
    if len(a.markers) != len(a.indices):
        raise NotAdmissible("one marker word per index is required")
    if any(set(m) - {"0", "1"} for m in a.markers):
        raise NotAdmissible("markers are words over {0,1}")
    if not a.indices:
        if not 0 <= a.branch < p:
            raise NotAdmissible("immediate basin index must lie in 0..p-1")
        return
    if not 1 <= a.branch <= p - 1:
        raise NotAdmissible("branch must lie in 1..p-1, got %d" % a.branch)
    for s, (iota, m) in enumerate(zip(a.indices, a.markers)):
        l = len(m)
        lo = l * p + 1
        ok = lo <= iota <= (l + 1) * p if s == 0 else lo <= iota < (l + 1) * p
        if not ok:
            raise NotAdmissible("index %d at position %d does not fit marker %r (p = %d)"
                                % (iota, s + 1, m, p))


def apply_map_address_parabolic(a: ParabolicAddress) -> ParabolicAddress:
    """Image drop under the parabolic polynomial.

    The immediate basins are permuted cyclically, i0 -> i0 - 1 (mod p), rather than
    treated as an error.
    """
    p = a.p
    if not a.indices:
        return ParabolicAddress(p, (), (), (a.branch - 1) % p)
    iota, m = a.indices[0], a.markers[0]
    if iota == 1:
        if a.generation == 1:
            return ParabolicAddress(p, (), (), (a.branch - 1) % p)
        return ParabolicAddress(p, a.indices[1:], a.markers[1:], a.branch)
    l = len(m)
    if iota == l * p + 1:
        # l >= 1 here since iota > 1; the leading marker bit is consumed
        m = m[1:]
    return ParabolicAddress(p, (iota - 1,) + a.indices[1:], (m,) + a.markers[1:], a.branch)


# -- omega-tailed angles ----------------------------------------------------

OmegaLike = Union[str, "object"]     # a trusted bit string, or anything with .bits


def _omega_bits(omega) -> str:
    if omega is None:
        raise OmegaUnavailable("this needs the binary digits of the critical-value angle")
    bits = omega if isinstance(omega, str) else getattr(omega, "bits", None)
    if bits is None:
        raise TypeError("omega must be a bit string or carry a .bits attribute")
    if set(bits) - {"0", "1"}:
        raise ValueError("omega bits must be 0/1")
    return bits


@dataclass(frozen=True, order=True)
class OmegaAngle:
    """The angle 0.prefix followed by the digits of omega from position ``shift`` + 1.

    shift > 0 only arises with an empty prefix (forward images of the critical value).
    """
    prefix: str = ""
    shift: int = 0

    def __post_init__(self):
        if set(self.prefix) - {"0", "1"}:
            raise ValueError("prefix must be a 0/1 word")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")

    def doubled(self) -> "OmegaAngle":
        if self.prefix:
            return OmegaAngle(self.prefix[1:], self.shift)
        return OmegaAngle("", self.shift + 1)

    def negated_digits(self, omega, n: int) -> str:
        return "".join("1" if c == "0" else "0" for c in self.digits(omega, n))

    def trusted_length(self, omega) -> int:
        return len(self.prefix) + max(0, len(_omega_bits(omega)) - self.shift)

    def digits(self, omega, n: int) -> str:
        bits = self.prefix + _omega_bits(omega)[self.shift:]
        if n > len(bits):
            raise Unresolved("asked for %d digits, only %d are trusted" % (n, len(bits)))
        return bits[:n]

    def value(self, omega) -> mpmath.mpf:
        """Numeric value to the trusted resolution of omega."""
        bits = self.digits(omega, self.trusted_length(omega))
        with mpmath.workprec(len(bits) + 32):
            return mpmath.mpf(int(bits, 2) if bits else 0) / (mpmath.mpf(2) ** len(bits))

    def __str__(self) -> str:
        tail = "w" if not self.shift else "w[%d:]" % self.shift
        return "0.%s%s" % (self.prefix, tail)


def _spine_partner(word: str) -> Optional[str]:
    """Partner of a word in the spine set {0^k, 1^k, 01^k, 10^k : k >= 1}, else None."""
    if not word:
        return None
    if word.count(word[0]) == len(word):
        return ("1" if word[0] == "0" else "0") * len(word)
    head, tail = word[0], word[1:]
    if tail and tail.count(tail[0]) == len(tail) and tail[0] != head:
        return tail[0] + head * len(tail)
    return None


def siegel_partner(t: OmegaAngle) -> Optional[OmegaAngle]:
    """Other angle landing with ``t`` for the Siegel polynomial, or None.

    The orbit first meets the spine after n steps, where n is the length of the
    longest suffix of the prefix lying in the spine set; the prefix before that is
    kept and the suffix is swapped for its partner.
    """
    if t.shift or not t.prefix:
        return None
    w = t.prefix
    for n in range(len(w)):
        q = _spine_partner(w[n:])
        if q is not None:
            return OmegaAngle(w[:n] + q)
    return None


# -- itineraries ------------------------------------------------------------

@dataclass(frozen=True)
class Generic:
    pass


@dataclass(frozen=True)
class PreBeta:
    step: int           # iterates needed to reach the beta fixed point
    variant: int = 0    # 0: tail of zeros, 1: tail of ones


@dataclass(frozen=True)
class PreCriticalSiegel:
    k: int
    variant: int        # 0 or 1; the two accesses


@dataclass(frozen=True)
class PreParabolic:
    prefix: str
    branch: int         # i in 1..p, the sorted cycle angle the tail follows


@dataclass(frozen=True)
class Itinerary:
    sequence: Union[BinarySequence, OmegaAngle]
    source: object = field(default_factory=Generic)

    def digits(self, n: int, omega=None) -> str:
        if isinstance(self.sequence, OmegaAngle):
            return self.sequence.digits(omega, n)
        return self.sequence.digits(n)

    def __str__(self) -> str:
        return str(self.sequence)


# marked points of the Siegel polynomial

@dataclass(frozen=True)
class Beta:
    pass


@dataclass(frozen=True)
class BetaPre:
    angle: Angle        # dyadic; beta' is BetaPre(1/2)


@dataclass(frozen=True)
class CritPre:
    """x_{1...1} (form "1", k ones) or x_{2 1...1} (form "2", k - 1 ones)."""
    form: str
    k: int

    def __post_init__(self):
        if self.form not in ("1", "2") or self.k < 1:
            raise ValueError("CritPre needs form '1' or '2' and k >= 1")

    def words(self) -> Tuple[str, str]:
        if self.form == "1":
            return "0" * self.k, "1" * self.k
        return "0" + "1" * self.k, "1" + "0" * self.k


@dataclass(frozen=True)
class OffSpinePre:
    """A point off the spine whose orbit reaches ``base`` after len(prefix) steps."""
    prefix: str
    base: object


@dataclass(frozen=True)
class Y0:
    pass


@dataclass(frozen=True)
class YPre:
    """y_{1...1} (form "1") or y_{2 1...1} (form "2") with the same k as CritPre."""
    form: str
    k: int

    def __post_init__(self):
        if self.form not in ("1", "2") or self.k < 1:
            raise ValueError("YPre needs form '1' or '2' and k >= 1")


def itinerary_of_marked_siegel(point, omega=None) -> List[Itinerary]:
    """Itineraries of a marked point of the Siegel polynomial.

    Omega-tailed results are symbolic; ``omega`` is only needed to read digits.
    """
    prefix = ""
    if isinstance(point, OffSpinePre):
        prefix, point = point.prefix, point.base
        if isinstance(point, OffSpinePre):
            raise ValueError("nest off-spine prefixes into a single word")
        if isinstance(point, Beta) and prefix:
            # the last step lands on beta through beta', whose two accesses differ in
            # that step's digit; the point is a dyadic preimage of beta
            tail = "0" if prefix[-1] == "1" else "1"
            return itinerary_of_marked_siegel(BetaPre(from_binary(BinarySequence(prefix, tail))))
    if isinstance(point, Beta):
        seqs = [BinarySequence(prefix, "0").canonical(), BinarySequence(prefix, "1")]
        return [Itinerary(s, PreBeta(len(prefix), v)) for v, s in enumerate(seqs)]
    if isinstance(point, BetaPre):
        t = point.angle
        m, _ = preperiod_and_period(t)
        if t.denominator != 1 << m:
            raise ValueError("BetaPre needs a dyadic angle")
        out = []
        for v in (0, 1):
            s = binary_expansion(t, twin=bool(v))
            out.append(Itinerary(s.prepend(prefix) if prefix else s, PreBeta(m + len(prefix), v)))
        return out
    if isinstance(point, CritPre):
        return [Itinerary(OmegaAngle(prefix + w), PreCriticalSiegel(point.k, v))
                for v, w in enumerate(point.words())]
    raise TypeError("unknown marked point %r" % (point,))


def _cycle_words(nu: RotationNumber) -> List[str]:
    return [binary_expansion(t).period for t in parabolic_cycle(nu)]


def itinerary_of_marked_parabolic(point, nu: RotationNumber) -> List[Itinerary]:
    """The p itineraries of a marked point of the parabolic polynomial.

    Branch i (1-based) follows the i-th smallest angle of the parabolic cycle.
    For y_{1...1} the tails i <= q carry prefix 0^k; for y_{2 1...1} the tails
    i > q carry prefix 0 1^k and the others 1 0^k.
    """
    prefix = ""
    if isinstance(point, OffSpinePre):
        prefix, point = point.prefix, point.base
    q, p = nu.q, nu.p
    words = _cycle_words(nu)
    out = []
    for i, per in enumerate(words, start=1):
        if isinstance(point, Y0):
            head = ""
        elif isinstance(point, YPre):
            k = point.k
            low = i <= q
            if point.form == "1":
                head = ("0" if low else "1") * k
            else:
                head = "1" + "0" * k if low else "0" + "1" * k
        else:
            raise TypeError("unknown marked point %r" % (point,))
        seq = BinarySequence(prefix + head, per).canonical()
        out.append(Itinerary(seq, PreParabolic(prefix + head, i)))
    return out


def angle_itinerary(t: Angle) -> Itinerary:
    s = binary_expansion(t)
    if not s.period:
        return Itinerary(s, PreBeta(len(s.preperiod), 0))
    return Itinerary(s)


def itinerary_to_angle(it: Itinerary, omega=None) -> Union[Angle, mpmath.mpf]:
    seq = it.sequence
    if isinstance(seq, OmegaAngle):
        return seq.value(omega)
    return from_binary(seq)


# -- ray-equivalence classes ------------------------------------------------

SINGLETON = "Singleton"
SIEGEL_BIACCESS = "SiegelBiaccess"
PARABOLIC_COLAND = "ParabolicColand"
BETA_CLASS = "BetaClass"

ClassAngle = Union[Angle, OmegaAngle]


@dataclass(frozen=True)
class RayClass:
    angles: FrozenSet[ClassAngle]
    kind: str
    resolution: Optional[int] = None     # trusted omega bits behind an approximate decision

    def sorted(self) -> List[ClassAngle]:
        return sorted(self.angles, key=_sort_key)

    def __len__(self) -> int:
        return len(self.angles)

    def __contains__(self, t) -> bool:
        return t in self.angles

    def to_dict(self, t=None) -> dict:
        out = {"class": [str(a) for a in self.sorted()], "kind": self.kind}
        if t is not None:
            out = {"angle": str(t), **out}
        if self.resolution is not None:
            out["resolution"] = self.resolution
        return out


def _sort_key(a):
    if isinstance(a, Angle):
        return (0, a.as_fraction(), "")
    return (1, 0, a.prefix + "|%d" % a.shift)


def _half(x: Angle, base: Angle) -> int:
    # 0 on [base, base + 1/2), 1 on [base + 1/2, base + 1)
    d = (x.as_fraction() - base.as_fraction()) % 1
    return 0 if d < Angle(1, 2).as_fraction() else 1


def parabolic_landing_set(u: Angle, nu: RotationNumber) -> Optional[FrozenSet[Angle]]:
    """All angles whose rays land with the ray at ``u`` for the parabolic polynomial,
    when that point is a preimage of the parabolic fixed point; None otherwise.

    The pullback keeps, at each step, the preimages on the same side as the orbit
    of ``u`` of the diameter through the smallest cycle angle (it lies in the
    critical gap, so no landing set crosses it).
    """
    cycle = parabolic_cycle(nu)
    cyc = frozenset(cycle)
    m, per = preperiod_and_period(u)
    if per != nu.p:
        return None
    orbit = [u]
    for _ in range(m):
        orbit.append(double(orbit[-1]))
    if orbit[-1] not in cyc:
        return None
    base = cycle[0]
    current = cyc
    for x in reversed(orbit[:-1]):
        side = _half(x, base)
        pre = set()
        for a in current:
            for b in (0, 1):
                y = Angle(a.numerator + b * a.denominator, 2 * a.denominator)
                if _half(y, base) == side:
                    pre.add(y)
        current = frozenset(pre)
    return current


def _is_dyadic(t: Angle) -> bool:
    return t.denominator & (t.denominator - 1) == 0


def ray_class(t, omega=None, nu: RotationNumber = RotationNumber(3, 5),
              max_prefix: int = 64) -> RayClass:
    """Ray-equivalence class of ``t`` for the mating.

    ``t`` may be an exact Angle, an OmegaAngle (symbolic), or an mpf approximation.
    Approximate input needs ``omega``; its class records how many prefix steps were
    resolved.
    """
    if isinstance(t, Angle):
        return _exact_class(t, nu)
    if isinstance(t, OmegaAngle):
        s = siegel_partner(t)
        if s is None:
            return RayClass(frozenset([t]), SINGLETON)
        return RayClass(frozenset([t, s]), SIEGEL_BIACCESS)
    if isinstance(t, (mpmath.mpf, float)):
        return _approximate_class(t, omega, max_prefix)
    raise TypeError("cannot classify %r" % (t,))


def _exact_class(t: Angle, nu: RotationNumber) -> RayClass:
    if _is_dyadic(t):
        # preimages of beta keep a single ray on each side
        return RayClass(frozenset([t]), BETA_CLASS)
    # rational angles never reach the omega pattern, which is irrational
    lands = parabolic_landing_set(negate(t), nu)
    if lands is None:
        return RayClass(frozenset([t]), SINGLETON)
    return RayClass(frozenset(negate(a) for a in lands), PARABOLIC_COLAND)


def _approximate_class(t, omega, max_prefix: int) -> RayClass:
    bits = _omega_bits(omega)
    n_bits = len(bits)
    # need a comfortable margin of matched bits after the prefix
    margin = 24
    with mpmath.workprec(n_bits + max_prefix + 64):
        # converting at the default precision would drop the trusted low bits
        x = mpmath.frac(mpmath.mpf(t))
        w = mpmath.mpf(int(bits, 2)) / mpmath.mpf(2) ** n_bits if bits else mpmath.mpf(0)
        tol = mpmath.mpf(2) ** -(n_bits - 1)
        resolved = 0
        for n in range(max_prefix + 1):
            if n + margin > n_bits:
                break
            shifted = mpmath.frac(x * mpmath.mpf(2) ** n)
            d = abs(shifted - w)
            d = min(d, 1 - d)
            resolved = n
            if d <= tol * 2 ** n:
                prefix = "".join(str(int(mpmath.floor(x * 2 ** (j + 1))) % 2) for j in range(n))
                cls = ray_class(OmegaAngle(prefix))
                return RayClass(cls.angles, cls.kind, resolution=n_bits)
            if d > 2 ** -margin:
                continue
            raise Unresolved("orbit step %d is within 2^-%d of omega but not resolved" % (n, margin))
    return RayClass(frozenset([t]), SINGLETON, resolution=resolved)


def class_closure(angles: Iterable[ClassAngle], nu: RotationNumber) -> FrozenSet[ClassAngle]:
    """Transitive closure of the two co-landing relations, by repeated expansion."""
    todo = list(angles)
    seen = set()
    while todo:
        a = todo.pop()
        if a in seen:
            continue
        seen.add(a)
        todo.extend(ray_class(a, nu=nu).angles - seen)
    return frozenset(seen)


def double_class_angle(a: ClassAngle) -> ClassAngle:
    return double(a) if isinstance(a, Angle) else a.doubled()


# -- gluing report ----------------------------------------------------------

@dataclass
class GluingReport:
    nu: RotationNumber
    sample_size: int
    classes: Dict[str, RayClass]
    size_counts: Dict[int, int]
    violations: List[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        sizes = ", ".join("%d: %d" % kv for kv in sorted(self.size_counts.items()))
        return "%d angles, %d classes (sizes %s), %d violations" % (
            self.sample_size, len(set(self.classes.values())), sizes, len(self.violations))


def verify_gluing(sample: Sequence[ClassAngle], omega=None,
                  nu: RotationNumber = RotationNumber(3, 5)) -> GluingReport:
    """Check size, partition and doubling-equivariance of the classes of a sample."""
    allowed = {1, 2, nu.p}
    classes: Dict[ClassAngle, RayClass] = {}
    violations: List[str] = []

    def cls(a):
        if a not in classes:
            classes[a] = ray_class(a, omega, nu)
        return classes[a]

    for t in sample:
        c = cls(t)
        if t not in c.angles:
            violations.append("%s is missing from its own class" % t)
        if len(c) not in allowed:
            violations.append("class of %s has size %d" % (t, len(c)))
        for s in c.angles:
            if cls(s).angles != c.angles:
                violations.append("class of %s is not the class of its member %s" % (t, s))
        if class_closure(c.angles, nu) != c.angles:
            violations.append("class of %s is not closed" % t)
        image = cls(double_class_angle(t)).angles
        for s in c.angles:
            if double_class_angle(s) not in image:
                violations.append("double(%s) leaves the class of double(%s)" % (s, t))
    # distinct classes must be disjoint
    owner: Dict[ClassAngle, FrozenSet] = {}
    for c in set(cl.angles for cl in classes.values()):
        for a in c:
            if a in owner and owner[a] != c:
                violations.append("classes %s and %s overlap at %s"
                                  % (_fmt(owner[a]), _fmt(c), a))
            owner[a] = c
    counts: Dict[int, int] = {}
    for c in set(cl.angles for cl in classes.values()):
        counts[len(c)] = counts.get(len(c), 0) + 1
    return GluingReport(nu, len(sample), {str(k): v for k, v in classes.items()}, counts, violations)


def _fmt(angles) -> str:
    return "{%s}" % ", ".join(str(a) for a in sorted(angles, key=_sort_key))
