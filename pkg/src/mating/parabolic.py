"""Local dynamics at a parabolic fixed point.

A germ f(z) = z + a (z - z0)^(p+1) + ... is fitted from the map, and the Fatou
coordinate is computed by iterating into the petal and evaluating a formal
series solution of the Abel equation there.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import series
from .errors import (DegreeNotFound, LeftSector, NoConvergence, NotConverged,
                     NotParabolic, Undecided)

ComplexMap = Callable[[complex], complex]

CAUCHY_POINTS = 64


@dataclass(frozen=True)
class ParabolicGerm:
    zeta0: complex
    a: complex
    p: int
    # radius where the leading-order model holds to 1%
    delta: float = 0.1
    iterate: int = 1
    jet: Tuple[complex, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.a == 0 or self.p < 1:
            raise ValueError("germ needs a != 0 and p >= 1")


@dataclass(frozen=True)
class Sector:
    zeta0: complex
    v: complex
    alpha: float
    delta: float


@dataclass(frozen=True)
class FatouParams:
    n_iter: int = 200000
    tol: float = 1e-9
    # None: derived from the germ so the half-plane petal sits well inside the germ disk
    x0: Optional[float] = None

    def __post_init__(self):
        if self.n_iter < 1 or self.tol <= 0:
            raise ValueError("need n_iter >= 1 and tol > 0")


class DirectionEstimate(NamedTuple):
    v: complex
    residual: float


def _resolve(fmap, iterate: int = 1) -> ComplexMap:
    step = fmap.eval if hasattr(fmap, "eval") else fmap
    if iterate == 1:
        return step

    def composed(z):
        for _ in range(iterate):
            z = step(z)
        return z
    return composed


def _cauchy_coefficients(h: ComplexMap, r: float, n: int) -> np.ndarray:
    phi = 2 * np.pi * np.arange(CAUCHY_POINTS) / CAUCHY_POINTS
    w = r * np.exp(1j * phi)
    vals = np.array([h(x) for x in w], dtype=complex)
    c = np.fft.fft(vals) / CAUCHY_POINTS
    return c[:n] / r ** np.arange(n)


def _exact_jet(fmap, zeta0: complex, iterate: int, order: int) -> Optional[np.ndarray]:
    taylor = getattr(fmap, "taylor", None)
    if taylor is None:
        return None
    h = np.asarray(taylor(zeta0, order), dtype=complex).copy()
    h[0] -= zeta0
    if abs(h[0]) > 1e-12 * max(1.0, abs(zeta0)):
        raise NotParabolic("%r is not a fixed point (f - z0 = %g)" % (zeta0, abs(h[0])))
    h[0] = 0.0
    return series.iterate(h, iterate, order)


def fit_germ(fmap, zeta0: complex, max_p: int, iterate: int = 1, tol: float = 1e-9,
             jet_order: Optional[int] = None) -> ParabolicGerm:
    """Fit z + a (z - z0)^(p+1) to ``fmap`` (composed ``iterate`` times) at z0.

    Maps exposing ``taylor(z0, order)`` get an exact jet by series composition;
    black-box callables are sampled on circles of radius 2^-k and the estimate is
    accepted once two consecutive radii agree.
    """
    zeta0 = complex(zeta0)
    n = jet_order or (4 * max_p + 8)
    jet = _exact_jet(fmap, zeta0, iterate, n)
    f = _resolve(fmap, iterate)

    def h(w):
        return f(zeta0 + w) - zeta0

    if jet is None:
        n = min(n, 3 * max_p + 6)
        prev = None
        for k in range(2, 16):
            c = _cauchy_coefficients(h, 2.0 ** -k, max_p + 2)
            if prev is not None:
                scale = np.maximum(np.abs(c), 1.0)
                if np.max(np.abs(c - prev) / scale) < tol:
                    break
            prev = c
        # the larger radius of the agreeing pair has the smaller noise floor
        r = 2.0 ** -(k - 1)
        jet = _cauchy_coefficients(h, r, n)
        jet[0] = 0.0
        noise = 1e-10 / r ** (np.arange(n) - 1.0)
        jet[2:][np.abs(jet[2:]) < noise[2:]] = 0.0
    else:
        r = 0.0

    if abs(jet[1] - 1) > max(tol, 1e-12) * 10:
        raise NotParabolic("multiplier %r is not 1" % jet[1])
    jet[1] = 1.0
    a, p = None, None
    for j in range(2, max_p + 2):
        # noise floor of the j-th coefficient scales like eps / r^(j-1)
        floor = 1e-10 if r == 0.0 else 1e-10 / r ** (j - 1)
        if abs(jet[j]) > floor:
            a, p = complex(jet[j]), j - 1
            break
    if a is None:
        raise DegreeNotFound("no nonzero coefficient up to degree %d" % (max_p + 1))
    jet[2:p + 1] = 0.0
    delta = _adaptive_radius(h, a, p)
    return ParabolicGerm(zeta0, a, p, delta, iterate, tuple(complex(x) for x in jet))


def _adaptive_radius(h: ComplexMap, a: complex, p: int, rel: float = 0.01) -> float:
    phi = 2 * np.pi * (np.arange(32) + 0.5) / 32
    for k in range(1, 40):
        r = 2.0 ** -k
        ok = True
        for t in phi:
            w = r * complex(math.cos(t), math.sin(t))
            lead = a * w ** (p + 1)
            if abs(h(w) - w - lead) > rel * abs(lead):
                ok = False
                break
        if ok:
            return r
    return 2.0 ** -40


def _vectors(g: ParabolicGerm, sign: float) -> List[complex]:
    base = (sign / (g.p * g.a)) ** (1.0 / g.p)
    vs = [base * cmath.exp(2j * math.pi * k / g.p) for k in range(g.p)]
    return sorted(vs, key=cmath.phase)


def attracting_vectors(g: ParabolicGerm) -> List[complex]:
    """Solutions of p a v^p = -1, sorted by argument."""
    return _vectors(g, -1.0)


def repelling_vectors(g: ParabolicGerm) -> List[complex]:
    """Solutions of p a v^p = +1, sorted by argument."""
    return _vectors(g, 1.0)


def in_sector(s: Sector, z: complex) -> bool:
    w = z - s.zeta0
    r = abs(w)
    if not 0 < r < s.delta:
        return False
    return abs(cmath.phase(w / s.v)) < s.alpha / 2


def petal_opening(p: int) -> float:
    """Opening used for petal pre-checks: inside (15 pi / 8p, 2 pi / p)."""
    return 15 * math.pi / (8 * p) + math.pi / (16 * p)


def attracting_sector(g: ParabolicGerm, v: complex, delta: Optional[float] = None) -> Sector:
    return Sector(g.zeta0, v, petal_opening(g.p), delta or g.delta)


def thin_repelling_sector(g: ParabolicGerm, v: complex, delta: Optional[float] = None) -> Sector:
    return Sector(g.zeta0, v, math.pi / (4 * g.p), delta or g.delta)


def default_x0(g: ParabolicGerm) -> float:
    # |w|^p ~ 1/(p|a| Re Phi): keeps {Re Phi > x0} inside half the germ radius
    return 2.0 ** g.p / (g.p * abs(g.a) * g.delta ** g.p)


def invariant_petal_radius(fmap, g: ParabolicGerm, r_max: float = 0.5, defect: float = 0.5,
                           samples: int = 24) -> float:
    """Largest r on a 2^(-1/4) grid whose half-plane petals are certified forward invariant.

    In u = -1/(p a z^p) the petal of each attracting vector is Re u > x0 with
    x0 = 1/(p |a| r^p). A sampled grid of such u must satisfy |u(f(z)) - u(z) - 1| < defect
    and stay on the same sheet; defect < 1 forces Re u to grow along orbits.
    """
    f = _resolve(fmap, g.iterate)
    p, a = g.p, g.a
    vecs = attracting_vectors(g)
    xs = [0.0, 0.25, 1.0, 3.0]
    ys = np.linspace(-6.0, 6.0, samples)
    for k in range(0, 80):
        r = r_max * 2.0 ** (-k / 4)
        x0 = 1.0 / (p * abs(a) * r ** p)
        ok = True
        for v in vecs:
            for s in xs:
                for y in ys:
                    u = complex(x0 * (1 + s), x0 * y)
                    # p a v^p = -1, so z = v u^(-1/p) is the preimage on the sheet of v
                    z = v * u ** (-1.0 / p)
                    fz = f(z + g.zeta0) - g.zeta0
                    if not (abs(fz) < r and abs(cmath.phase(fz / v)) < math.pi / p):
                        ok = False
                        break
                    du = -1.0 / (p * a * fz ** p) - u
                    if abs(du - 1) >= defect:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return r
    return g.delta


# -- formal Fatou coordinate -------------------------------------------------

@dataclass(frozen=True)
class _AbelSeries:
    """Psi(w) = sum_{k=-p..K, k != 0} e_k w^k + rho log w with Psi(h(w)) = Psi(w) + 1 + O(w^(K+p+1))."""
    p: int
    e: Tuple[complex, ...]      # e[j] is the coefficient of w^(j - p)
    rho: complex
    order: int

    def __call__(self, w: complex, v: complex) -> complex:
        total = 0j
        for j in range(len(self.e) - 1, -1, -1):
            total = total * w + self.e[j]
        total /= w ** self.p
        # branch cut opposite the approach direction v
        return total + self.rho * (cmath.log(w / v) + cmath.log(v))


def _abel_series(g: ParabolicGerm, K: int) -> _AbelSeries:
    p = g.p
    M = K + p                     # equations for orders 0..M
    need = M + p + 2
    jet = series.trunc(g.jet, need + 1)
    u = series.trunc(jet[1:], need)          # h(w)/w
    u[0] -= 1.0                              # h(w)/w - 1 = O(w^p)
    L = series.log1p(u, need)
    unknowns = [k for k in range(-p, K + 1) if k != 0] + ["log"]
    A = np.zeros((M + 1, len(unknowns)), dtype=complex)
    for col, k in enumerate(unknowns):
        if k == "log":
            d = L
            shift = 0
        else:
            d = series.exp0(k * L, need)
            d[0] -= 1.0
            shift = k
        for j in range(M + 1):
            idx = j - shift
            if 0 <= idx < need:
                A[j, col] = d[idx]
    rhs = np.zeros(M + 1, dtype=complex)
    rhs[0] = 1.0
    sol = np.linalg.solve(A, rhs)
    e = [0j] * (K + p + 1)
    for col, k in enumerate(unknowns[:-1]):
        e[k + p] = complex(sol[col])
    return _AbelSeries(p, tuple(e), complex(sol[-1]), K)


def _series_order(g: ParabolicGerm) -> int:
    available = len(g.jet) - 2 * g.p - 3
    return max(1, min(3 * g.p + 3, available))


_EPS = np.finfo(float).eps


def fatou_coordinate(fmap, g: ParabolicGerm, v: complex, z: complex,
                     fp: FatouParams = FatouParams()) -> complex:
    """Attracting Fatou coordinate: Phi(f(z)) = Phi(z) + 1 on the petal of v."""
    f = _resolve(fmap, g.iterate)
    sec = attracting_sector(g, v)
    if not in_sector(sec, z):
        raise LeftSector("%r is not in the attracting sector of %r" % (z, v))
    psi = _abel_series(g, _series_order(g))
    w = z - g.zeta0
    n = 0
    checkpoint = 16
    last = None
    while True:
        while n < checkpoint:
            if n >= fp.n_iter:
                raise NotConverged("Fatou coordinate not converged in %d steps" % fp.n_iter)
            z = f(z)
            n += 1
            w = z - g.zeta0
            if not in_sector(sec, z):
                raise LeftSector("orbit left the attracting sector at step %d" % n)
        est = psi(w, v) - n
        # each step moves Psi by ~p eps |Psi| in roundoff, so drift below that floor is noise
        floor = 4 * g.p * n * _EPS * abs(est)
        if last is not None and abs(est - last) < fp.tol / 4 + floor:
            return est
        last = est
        checkpoint *= 2


def petal_membership(fmap, g: ParabolicGerm, v: complex, z: complex,
                     fp: FatouParams = FatouParams()) -> bool:
    """True iff z lies in the half-plane petal {Re Phi > x0} of v inside the germ disk."""
    f = _resolve(fmap, g.iterate)
    x0 = default_x0(g) if fp.x0 is None else fp.x0
    own = attracting_sector(g, v)
    others = [attracting_sector(g, u) for u in attracting_vectors(g) if abs(u - v) > 1e-9 * abs(v)]
    if not 0 < abs(z - g.zeta0) < g.delta:
        return False
    zn = z
    for n in range(fp.n_iter):
        if in_sector(own, zn):
            try:
                phi = fatou_coordinate(fmap, g, v, zn, fp)
            except LeftSector:
                return False
            return (phi - n).real > x0
        if any(in_sector(s, zn) for s in others):
            return False
        zn = f(zn)
        if not abs(zn - g.zeta0) < g.delta:
            return False
    raise Undecided("orbit of %r still near the repelling axis after %d steps" % (z, fp.n_iter))


def convergence_direction(orbit: Sequence[complex], p: int, zeta0: complex = 0j) -> DirectionEstimate:
    """Estimate v in z_n ~ v / n^(1/p) by least squares on the orbit tail.

    Model: n^(1/p) (z_n - z0) = v + sum_j c_j n^(-j/p) + sum_j d_j log(n) n^(-1-j/p).
    """
    w = np.asarray(orbit, dtype=complex) - zeta0
    N = len(w)
    if N < 64 or not np.all(np.isfinite(w)) or np.any(w == 0):
        raise NoConvergence("orbit too short, non-finite or hits the fixed point")
    n = np.arange(N, dtype=float)
    tail = slice(N // 2, N)
    y = n[tail] ** (1.0 / p) * w[tail]
    mags = np.abs(w)
    if not (mags[-1] < mags[N // 2] < mags[N // 4] and mags[-1] < 0.5):
        raise NoConvergence("orbit is not converging to the fixed point")
    q = len(y) // 4
    if np.max(np.abs(y[-q:] - y[-1])) > 0.1 * abs(y[-1]):
        raise NoConvergence("n^(1/p) z_n has not stabilized")
    nt = n[tail]
    cols = [nt ** (-j / p) for j in range(0, 2 * p + 1)]
    cols += [np.log(nt) * nt ** (-1.0 - j / p) for j in range(0, p + 1)]
    X = np.stack(cols, axis=1)
    scale = np.max(np.abs(X), axis=0)
    coef, *_ = np.linalg.lstsq(X / scale, y, rcond=None)
    fit = (X / scale) @ coef
    resid = float(np.sqrt(np.mean(np.abs(fit - y) ** 2)))
    return DirectionEstimate(complex(coef[0] / scale[0]), resid)


def nearest_vector(vectors: Sequence[complex], z: complex) -> int:
    """Index of the vector closest in argument to z."""
    return int(np.argmin([abs(cmath.phase(z / v)) for v in vectors]))
