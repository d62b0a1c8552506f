"""External rays of z -> c1 z + z^2 by potential continuation, and the critical-value angle.

Work happens in the centred coordinate s = z + c1/2, where the map becomes s -> s^2 + c
with c = c1/2 - c1^2/4; the Boettcher map then satisfies phi(s) = s + O(1/s).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy

from .circle import Angle, as_angle, double, preperiod_and_period
from .errors import (FlowTrapped, Inconsistent, NewtonDiverged, NotConverged)
from . import kernels
from .maps import MapSpec, PARA_QUAD, SIEGEL_QUAD

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class RayOptions:
    start_radius: float = 1000.0
    steps_per_halving: int = 8
    min_potential: float = 1e-8
    land_tol: float = 1e-6
    newton_iters: int = 60
    max_retries: int = 24
    refine: bool = True            # snap the tail onto the landing periodic/preperiodic point
    max_refine_period: int = 60


@dataclass(frozen=True)
class OmegaEstimate:
    """An irrational angle known to within ``error``; ``bits`` are the trusted binary digits."""
    value: mpmath.mpf
    error: float
    bits: str
    runs: Tuple[Tuple[float, float], ...] = ()      # (offset, value) per run

    def __float__(self) -> float:
        return float(self.value)

    @property
    def precision(self) -> int:
        return len(self.bits) + 64

    def preimages(self) -> Tuple["OmegaEstimate", "OmegaEstimate"]:
        """The two angles doubling to this one: value/2 and (value + 1)/2."""
        with mpmath.workprec(self.precision):
            return tuple(OmegaEstimate(mpmath.mpf(self.value + b) / 2, self.error / 2,
                                       str(b) + self.bits) for b in (0, 1))

    def doubled(self) -> "OmegaEstimate":
        with mpmath.workprec(self.precision):
            return OmegaEstimate(mpmath.frac(2 * self.value), 2 * self.error, self.bits[1:])


AngleLike = Union[Angle, Fraction, mpmath.mpf, OmegaEstimate, str]


@dataclass(frozen=True)
class RayTrace:
    angle: object
    samples: Tuple[Tuple[float, complex], ...]
    landing: Optional[complex]
    converged: bool
    tail: float = math.inf
    method: str = "tail"           # tail | periodic(d) | preperiodic(l, d) | none


# -- centred quadratic ------------------------------------------------------

class _Quad:
    __slots__ = ("c1", "c", "shift")

    def __init__(self, poly: MapSpec):
        if poly.kind not in (SIEGEL_QUAD, PARA_QUAD):
            raise ValueError("rays are defined for the quadratic polynomials only")
        self.c1 = poly.linear
        self.shift = self.c1 / 2
        self.c = self.shift - self.c1 * self.c1 / 4

    def iterate(self, s: complex, k: int) -> Tuple[complex, complex]:
        """(g^k(s), (g^k)'(s)) for g(s) = s^2 + c."""
        d = 1.0 + 0j
        c = self.c
        for _ in range(k):
            d = 2 * s * d
            s = s * s + c
        return s, d

    def bottcher(self, s: complex, terms: int = 60) -> complex:
        """phi(s) for |s| large, by the convergent product with principal branches."""
        out = s
        c = self.c
        w = s
        scale = 0.5
        for _ in range(terms):
            r = c / (w * w)
            if abs(r) < 1e-18:
                break
            out *= (1 + r) ** scale
            w = w * w + c
            scale *= 0.5
            if abs(w) > 1e150:
                break
        return out

    def bottcher_inverse(self, target: complex) -> complex:
        """Solve phi(s) = target for |target| large."""
        s = target
        for _ in range(50):
            err = self.bottcher(s) - target
            s -= err
            if abs(err) <= 1e-16 * abs(target):
                break
        return s


def _potential_depth(log_r: float, g: float) -> int:
    return max(0, math.ceil(math.log2(log_r / g)))


def _angle_fraction(t, k: int) -> float:
    """2^k t mod 1 as a float, computed without rounding the angle first."""
    if isinstance(t, Angle):
        return ((t.numerator * pow(2, k, t.denominator)) % t.denominator) / t.denominator
    with mpmath.workprec(k + 80):
        return float(mpmath.frac(mpmath.mpf(t) * mpmath.mpf(2) ** k))


def _coerce_angle(t: AngleLike):
    if isinstance(t, OmegaEstimate):
        return t.value
    if isinstance(t, mpmath.mpf):
        return t
    if isinstance(t, float):
        raise TypeError("pass exact angles as Angle/Fraction or irrational ones as mpmath.mpf")
    return as_angle(t)


def _newton(q: _Quad, s: complex, k: int, target: complex, iters: int) -> Optional[complex]:
    s, ok = kernels.quad_newton(complex(s), k, complex(q.c), complex(target), iters)
    return s if ok else None


# -- tracing ------------------------------------------------------------------

def trace_ray(poly: MapSpec, t: AngleLike, opts: RayOptions = RayOptions()) -> RayTrace:
    """Trace the external ray of angle t inward down to opts.min_potential."""
    q = _Quad(poly)
    t = _coerce_angle(t)
    log_r = math.log(opts.start_radius)
    g = log_r
    s = q.bottcher_inverse(opts.start_radius * cmath.exp(1j * TWO_PI * _angle_fraction(t, 0)))
    samples = [(g, s - q.shift)]
    ratio = 2.0 ** (-1.0 / opts.steps_per_halving)
    last_step = None
    while g > opts.min_potential * (1 + 1e-12):
        g_next = max(g * ratio, opts.min_potential)
        retries = 0
        while True:
            k = _potential_depth(log_r, g_next)
            w = q.bottcher_inverse(cmath.exp(2 ** k * g_next + 1j * TWO_PI * _angle_fraction(t, k)))
            s_new = _newton(q, s, k, w, opts.newton_iters)
            ok = s_new is not None
            if ok and last_step is not None:
                # a jump far beyond the previous stride means Newton switched branch
                ok = abs(s_new - s) <= 8 * last_step + 1e-300
            if ok:
                break
            retries += 1
            if retries > opts.max_retries:
                partial = RayTrace(t, tuple(samples), None, False, math.inf, "none")
                err = NewtonDiverged("ray %s: step at potential %.3g rejected after %d retries"
                                     % (t, g_next, opts.max_retries))
                err.trace = partial
                raise err
            g_next = math.sqrt(g * g_next)
        last_step = abs(s_new - s)
        s, g = s_new, g_next
        samples.append((g, s - q.shift))
    return _finish(poly, t, tuple(samples), opts)


def _tail(samples, steps_per_halving: int) -> float:
    if len(samples) <= steps_per_halving:
        return math.inf
    return abs(samples[-1][1] - samples[-1 - steps_per_halving][1])


def _finish(poly: MapSpec, t, samples, opts: RayOptions) -> RayTrace:
    tail = _tail(samples, opts.steps_per_halving)
    if opts.refine and isinstance(t, Angle):
        hit = _refine_landing(poly, t, samples, opts)
        if hit is not None:
            z, method = hit
            return RayTrace(t, samples, z, True, tail, method)
    if tail < opts.land_tol:
        return RayTrace(t, samples, samples[-1][1], True, tail, "tail")
    return RayTrace(t, samples, None, False, tail, "none")


def _poly_iter(c1: complex, z: complex, k: int) -> Tuple[complex, complex]:
    d = 1.0 + 0j
    for _ in range(k):
        d = (c1 + 2 * z) * d
        z = c1 * z + z * z
    return z, d


def _solve(c1: complex, z: complex, k: int, rhs, iters: int = 80) -> Optional[complex]:
    """Newton for f^k(z) - rhs(z) = 0 where rhs is a constant or the identity (None)."""
    for _ in range(iters):
        v, d = _poly_iter(c1, z, k)
        if rhs is None:
            v, d = v - z, d - 1
        else:
            v = v - rhs
        if d == 0 or not cmath.isfinite(v):
            return None
        step = v / d
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            return z
    return None


def _heads_to(samples, z_star: complex, per: int) -> bool:
    """The ray tail approaches z_star: distances shrink over the last halvings, and the
    remaining distance is what the observed contraction of strides can still cover."""
    pts = [samples[-1 - per * j][1] for j in range(8) if per * j < len(samples)]
    if len(pts) < 4:
        return False
    dist = [abs(p - z_star) for p in pts]
    if dist[0] <= 1e-12 * (1 + abs(z_star)):
        return True
    if any(dist[j] >= dist[j + 1] for j in range(len(dist) - 1)):
        return False
    strides = [abs(pts[j] - pts[j + 1]) for j in range(len(pts) - 1)]
    rates = sorted(strides[j] / strides[j + 1] for j in range(len(strides) - 1) if strides[j + 1] > 0)
    if not rates:
        return False
    r = min(rates[len(rates) // 2], 0.999)
    # geometric tails sum to stride r/(1-r); algebraic (parabolic) tails exceed that by
    # a factor of order p + 1, hence the slack
    return dist[0] <= 20 * strides[0] / (1 - r) + 1e-12


def _refine_landing(poly: MapSpec, t: Angle, samples, opts: RayOptions):
    pre, per = preperiod_and_period(t)
    c1 = poly.linear
    tip = samples[-1][1]
    if per > opts.max_refine_period:
        return _pullback_landing(poly, t, samples, opts)
    periodic = t
    for _ in range(pre):
        periodic = double(periodic)
    if pre == 0:
        return _land_periodic(c1, per, tip, samples, opts)
    # land the periodic image first, then pull back along f^pre
    image = trace_ray(poly, periodic, RayOptions(**{**opts.__dict__, "refine": True}))
    if not image.converged:
        return None
    z_star = _solve(c1, tip, pre, image.landing)
    if z_star is None or not _heads_to(samples, z_star, opts.steps_per_halving):
        return None
    return z_star, "preperiodic(%d,%s)" % (pre, image.method)


def _land_periodic(c1, per, tip, samples, opts):
    for d in sympy.divisors(per):
        z_star = _solve(c1, tip, d, None)
        if z_star is None:
            continue
        _, mult = _poly_iter(c1, z_star, d)
        if abs(mult) < 1 - 1e-9:
            continue
        if _heads_to(samples, z_star, opts.steps_per_halving):
            return z_star, "periodic(%d)" % d
    return None


def _pullback_landing(poly: MapSpec, t: Angle, samples, opts: RayOptions, depth: int = 12):
    """Pull the tip of the ray of angle 2^depth t back along the forward orbit of our own tip.

    Equivalent to tracing depth more halvings of potential, but every Newton solve stays at
    the capped depth; the preimage branch at each step is the one nearer the forward orbit.
    """
    c1 = poly.linear
    fwd = [samples[-1][1]]
    for _ in range(depth):
        fwd.append(c1 * fwd[-1] + fwd[-1] * fwd[-1])
    image = t
    for _ in range(depth):
        image = double(image)
    far = trace_ray(poly, image, RayOptions(**{**opts.__dict__, "refine": False}))
    y = far.samples[-1][1]
    for j in range(depth, 0, -1):
        root = cmath.sqrt(c1 * c1 + 4 * y)
        a, b = (-c1 + root) / 2, (-c1 - root) / 2
        y = a if abs(a - fwd[j - 1]) <= abs(b - fwd[j - 1]) else b
    if not _heads_to(samples, y, opts.steps_per_halving):
        return None
    return y, "pullback(%d)" % depth


def landing_point(r: RayTrace) -> complex:
    if not r.converged:
        raise NotConverged("ray %s did not land (tail %.3g)" % (r.angle, r.tail))
    return r.landing


def caratheodory_sample(poly: MapSpec, t: AngleLike, opts: RayOptions = RayOptions()) -> complex:
    """The landing point of the ray of angle t."""
    return landing_point(trace_ray(poly, t, opts))


# -- critical-value angle ------------------------------------------------------

@dataclass(frozen=True)
class OmegaOptions:
    offsets: Tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    start_radius: float = 1000.0
    steps_per_halving: int = 8
    directions: int = 64
    seed_offset: float = 1e-2      # distance of the exterior seed from the forward orbit
    max_depth: int = 200           # longest pullback along the orbit
    max_err: float = 1e-3
    max_retries: int = 24


def log2_potential(poly: MapSpec, z: complex, radius: float = 1e6, max_iter: int = 20000) -> float:
    """log2 of the Green's function at z; -inf if z does not escape within max_iter."""
    q = _Quad(poly)
    s = z + q.shift
    for k in range(max_iter):
        if abs(s) > radius:
            return math.log2(math.log(abs(q.bottcher(s)))) - k
        s = s * s + q.c
    return -math.inf


def potential(poly: MapSpec, z: complex, radius: float = 1e6, max_iter: int = 20000) -> float:
    """Green's function of the filled Julia set at z (0 if no escape within max_iter)."""
    lg = log2_potential(poly, z, radius, max_iter)
    return 0.0 if lg == -math.inf else 2.0 ** lg


def external_angle(poly: MapSpec, z: complex, opts: OmegaOptions = OmegaOptions()) -> mpmath.mpf:
    """External angle of a point z outside the filled Julia set, read by ascending its ray.

    The depth-k angle a_k = 2^k * angle mod 1 is read once at the start; climbing to lower
    depth picks a_(k-1) in {a_k / 2, (a_k + 1) / 2}, i.e. one binary digit per level.
    """
    q = _Quad(poly)
    log_r = math.log(opts.start_radius)
    g = potential(poly, z)
    if g <= 0:
        raise FlowTrapped("point %s does not escape; cannot ascend" % z)
    s = z + q.shift
    k = _potential_depth(log_r, g)
    a_deep = cmath.phase(q.bottcher(kernels.quad_iterate(complex(s), k, complex(q.c)))) / TWO_PI % 1.0
    k_deep = k
    a = a_deep
    bits: List[int] = []
    ratio = 2.0 ** (1.0 / opts.steps_per_halving)
    last_step = None
    while k > 0:
        g_next = g * ratio
        retries = 0
        while True:
            k_next = _potential_depth(log_r, g_next)
            cands = []
            if k_next == k:
                cands = [(a, None)]
            else:
                # k_next = k - 1: the climb decides the next digit
                cands = [(a / 2, 0), ((a + 1) / 2, 1)]
            best = None
            for cand, bit in cands:
                w = q.bottcher_inverse(cmath.exp(2 ** k_next * g_next + 1j * TWO_PI * cand))
                s_new = _newton(q, s, k_next, w, 60)
                if s_new is None:
                    continue
                dist = abs(s_new - s)
                if best is None or dist < best[0]:
                    best = (dist, s_new, cand, bit)
            ok = best is not None and (last_step is None or best[0] <= 8 * last_step + 1e-300)
            if ok:
                break
            retries += 1
            if retries > opts.max_retries:
                raise FlowTrapped("ascent from %s stalled at potential %.3g" % (z, g))
            g_next = math.sqrt(g * g_next)
        last_step, s, a, bit = best
        if bit is not None:
            bits.append(bit)
        g, k = g_next, k_next
    # the digits were read from the most significant end backwards
    with mpmath.workprec(k_deep + 80):
        val = mpmath.mpf(a_deep) / mpmath.mpf(2) ** k_deep
        for j, b in enumerate(reversed(bits)):
            if b:
                val += mpmath.mpf(2) ** (-(j + 1))
        return mpmath.frac(val)


def _exterior_seed(poly: MapSpec, z: complex, offset: float, directions: int,
                   max_iter: int = 20000) -> Optional[complex]:
    """The fastest-escaping point on a small circle about z (highest potential)."""
    cands = z + offset * np.exp(1j * TWO_PI * np.arange(directions) / directions)
    times = np.empty(directions, dtype=np.int64)
    kernels.escape_times(cands, complex(poly.linear), max_iter, 1e6, times)
    j = int(np.argmin(times))
    return None if times[j] > max_iter else complex(cands[j])


def exterior_point_near(poly: MapSpec, z: complex, offset: float,
                        opts: OmegaOptions = OmegaOptions()) -> complex:
    """A point outside the filled Julia set within ``offset`` of the Julia point z.

    The exterior is thin near some Julia points, so the seed is placed next to a forward
    image f^n(z) and pulled back n times along the orbit (K is completely invariant, so
    the pullback stays outside K while the distance to the orbit contracts).
    """
    c1 = poly.linear
    orbit = [z]
    seed_at = {}
    for n in range(opts.max_depth + 1):
        if n > 0:
            orbit.append(c1 * orbit[-1] + orbit[-1] * orbit[-1])
        seed = seed_at.get(n) or _exterior_seed(poly, orbit[n], opts.seed_offset, opts.directions)
        if seed is None:
            continue
        y = seed
        for j in range(n, 0, -1):
            root = cmath.sqrt(c1 * c1 + 4 * y)
            a, b = (-c1 + root) / 2, (-c1 - root) / 2
            y = a if abs(a - orbit[j - 1]) <= abs(b - orbit[j - 1]) else b
        if abs(y - z) <= offset:
            return y
    raise FlowTrapped("no exterior point within %.3g of %s after %d pullbacks"
                      % (offset, z, opts.max_depth))


def angle_near(poly: MapSpec, z: complex, opts: OmegaOptions = OmegaOptions()) -> OmegaEstimate:
    """External angle of the ray landing at a Julia-set point z, with an error bar from
    shrinking offsets."""
    runs = []
    for off in opts.offsets:
        start = exterior_point_near(poly, z, off, opts)
        runs.append((off, external_angle(poly, start, opts)))
    vals = [v for _, v in runs]
    diffs = [abs(_circle_diff(vals[j], vals[j + 1])) for j in range(len(vals) - 1)]
    err = max(2 * float(diffs[-1]), 1e-300) if diffs else 1.0
    if err > opts.max_err:
        raise Inconsistent("angle estimates disagree by %.3g (> %.3g)" % (err, opts.max_err))
    value = vals[-1]
    nbits = max(0, int(math.floor(-math.log2(err))) - 1)
    frac = value
    digits = []
    with mpmath.workprec(nbits + 64):
        for _ in range(nbits):
            frac *= 2
            b = int(frac >= 1)
            digits.append(str(b))
            frac -= b
    return OmegaEstimate(value, err, "".join(digits), tuple((o, float(v)) for o, v in runs))


def _circle_diff(a, b):
    d = (a - b) % 1
    return d - 1 if d > 0.5 else d


def critical_value_angle(poly: MapSpec, opts: OmegaOptions = OmegaOptions()) -> OmegaEstimate:
    """The external angle of the critical value of the Siegel quadratic."""
    if poly.kind != SIEGEL_QUAD:
        raise ValueError("critical_value_angle needs a Siegel quadratic")
    c = -poly.linear / 2
    return angle_near(poly, poly.eval(c), opts)
