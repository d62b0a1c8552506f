"""The three dynamical systems and their special points.

SiegelQuad(theta):      z -> e^(2 pi i theta) z + z^2
ParaQuad(nu):           z -> e^(2 pi i nu) z + z^2
MatingRational(th, nu): z -> (e^(2 pi i nu) z + z^2) / (1 + e^(2 pi i theta) z)

The rational map is evaluated on the sphere: points with |z| > 2 are carried in
the chart w = 1/z, where the map reads w -> w (w + mu) / (1 + lam w).
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import mpmath
import numpy as np

from . import kernels, series
from .circle import RotationNumber
from .errors import LabelingUndecided
from .parabolic import (ParabolicGerm, attracting_vectors, fit_germ, invariant_petal_radius,
                        petal_opening)
from .theta import ThetaSpec, is_bounded_type, parse_theta

INF = complex(math.inf, 0.0)

SIEGEL_QUAD = "siegel"
PARA_QUAD = "parabolic"
MATING = "mating"


def _rotation(nu: RotationNumber) -> complex:
    with mpmath.workdps(60):
        return complex(mpmath.expjpi(mpmath.mpf(2 * nu.q) / nu.p))


@dataclass(frozen=True)
class MapSpec:
    kind: str
    theta: Optional[ThetaSpec] = None
    nu: Optional[RotationNumber] = None

    def __post_init__(self):
        if self.kind == SIEGEL_QUAD and (self.theta is None or self.nu is not None):
            raise ValueError("SiegelQuad takes theta only")
        if self.kind == PARA_QUAD and (self.nu is None or self.theta is not None):
            raise ValueError("ParaQuad takes nu only")
        if self.kind == MATING and (self.theta is None or self.nu is None):
            raise ValueError("MatingRational takes theta and nu")
        if self.kind not in (SIEGEL_QUAD, PARA_QUAD, MATING):
            raise ValueError("unknown map kind %r" % self.kind)

    @property
    def is_polynomial(self) -> bool:
        return self.kind != MATING

    @functools.cached_property
    def mu(self) -> complex:
        """e^(2 pi i theta)."""
        return self.theta.multiplier() if self.theta is not None else None

    @functools.cached_property
    def lam(self) -> complex:
        """e^(2 pi i nu)."""
        return _rotation(self.nu) if self.nu is not None else None

    @property
    def linear(self) -> complex:
        """Coefficient of z in the polynomial families."""
        return self.mu if self.kind == SIEGEL_QUAD else self.lam

    @property
    def bounded_type(self) -> Optional[bool]:
        if self.theta is None:
            return None
        v = is_bounded_type(self.theta)
        return v.bounded if v.exact else None

    def eval(self, z: complex) -> complex:
        if cmath.isinf(z):
            return INF
        if self.is_polynomial:
            return self.linear * z + z * z
        lam, mu = self.lam, self.mu
        if abs(z) > 2:
            w = 1.0 / z
            g = self.eval_w(w)
            return INF if g == 0 else 1.0 / g
        den = 1 + mu * z
        num = lam * z + z * z
        if den == 0:
            return INF
        return num / den

    def eval_w(self, w: complex) -> complex:
        """The map in the chart at infinity, w = 1/z (rational map only)."""
        if self.is_polynomial:
            raise ValueError("polynomials have a superattracting point at infinity; no w-chart map")
        return w * (w + self.mu) / (1 + self.lam * w)

    def eval_derivative(self, z: complex) -> complex:
        if self.is_polynomial:
            return self.linear + 2 * z
        lam, mu = self.lam, self.mu
        return (lam + 2 * z + mu * z * z) / (1 + mu * z) ** 2

    def taylor(self, z0: complex, order: int) -> np.ndarray:
        """Coefficients of f(z0 + w) in powers of w, up to w^(order-1)."""
        if self.is_polynomial:
            c = self.linear
            return series.trunc([c * z0 + z0 * z0, c + 2 * z0, 1.0], order)
        num = series.trunc([self.lam * z0 + z0 * z0, self.lam + 2 * z0, 1.0], order)
        den = series.trunc([1 + self.mu * z0, self.mu], order)
        return series.mul(num, series.inv(den, order), order)

    def describe(self) -> str:
        if self.kind == SIEGEL_QUAD:
            return "SiegelQuad(theta=%s)" % self.theta
        if self.kind == PARA_QUAD:
            return "ParaQuad(nu=%s)" % self.nu
        return "MatingRational(theta=%s, nu=%s)" % (self.theta, self.nu)

    def to_dict(self) -> Dict:
        out = {"kind": self.kind}
        if self.theta is not None:
            out["theta"] = self.theta.text
        if self.nu is not None:
            out["nu"] = str(self.nu)
        return out

    @classmethod
    def from_dict(cls, d: Dict) -> "MapSpec":
        theta = parse_theta(d["theta"]) if "theta" in d else None
        nu = RotationNumber.parse(d["nu"]) if "nu" in d else None
        return cls(d["kind"], theta, nu)


def SiegelQuad(theta) -> MapSpec:
    return MapSpec(SIEGEL_QUAD, theta=_theta(theta))


def ParaQuad(nu) -> MapSpec:
    return MapSpec(PARA_QUAD, nu=_nu(nu))


def MatingRational(theta, nu) -> MapSpec:
    return MapSpec(MATING, theta=_theta(theta), nu=_nu(nu))


def _theta(theta) -> ThetaSpec:
    return theta if isinstance(theta, ThetaSpec) else parse_theta(theta)


def _nu(nu) -> RotationNumber:
    return nu if isinstance(nu, RotationNumber) else RotationNumber.parse(nu)


# -- orbits ------------------------------------------------------------------

BUDGET_EXHAUSTED = "BudgetExhausted"
ESCAPED = "Escaped"
ENTERED_PETAL = "EnteredPetal"


class StopReason(NamedTuple):
    kind: str
    radius: Optional[float] = None
    petal: Optional[int] = None
    step: Optional[int] = None


@dataclass(frozen=True)
class OrbitRecord:
    start: complex
    points: Tuple[complex, ...]
    stop_reason: StopReason


def orbit(fmap: MapSpec, z: complex, n: int, escape_radius: Optional[float] = None,
          petals: Optional["PetalData"] = None) -> OrbitRecord:
    pts = [complex(z)]
    reason = StopReason(BUDGET_EXHAUSTED)
    for k in range(n + 1):
        cur = pts[-1]
        if escape_radius is not None and abs(cur) > escape_radius:
            reason = StopReason(ESCAPED, radius=escape_radius, step=k)
            break
        if petals is not None:
            j = petals.petal_of(cur)
            if j is not None:
                reason = StopReason(ENTERED_PETAL, petal=(petals.labels[j] + k) % petals.p, step=k)
                break
        if k == n:
            break
        pts.append(fmap.eval(cur))
    return OrbitRecord(complex(z), tuple(pts), reason)


# -- special points ----------------------------------------------------------

class FixedPoint(NamedTuple):
    location: complex
    multiplier: complex
    kind: str              # attracting | repelling | parabolic | Siegel


class CriticalPoint(NamedTuple):
    label: str
    location: complex


def _fixed_kind(m: complex, irrational: bool) -> str:
    r = abs(m)
    if r < 1 - 1e-12:
        return "attracting"
    if r > 1 + 1e-12:
        return "repelling"
    return "Siegel" if irrational else "parabolic"


def fixed_points(fmap: MapSpec) -> List[FixedPoint]:
    if fmap.is_polynomial:
        c = fmap.linear
        irr = fmap.kind == SIEGEL_QUAD
        beta = 1 - c
        out = [FixedPoint(0j, c, _fixed_kind(c, irr))]
        if abs(beta) > 0:
            m = 2 - c
            out.append(FixedPoint(beta, m, _fixed_kind(m, False)))
        out.append(FixedPoint(INF, 0j, "attracting"))
        return out
    lam, mu = fmap.lam, fmap.mu
    beta = (1 - lam) / (1 - mu)
    m = fmap.eval_derivative(beta)
    return [FixedPoint(0j, lam, "parabolic"),
            FixedPoint(INF, mu, "Siegel"),
            FixedPoint(beta, m, _fixed_kind(m, False))]


def beta_point(fmap: MapSpec) -> complex:
    """The repelling fixed point (beta for the polynomials, the finite nonzero one for F)."""
    if fmap.is_polynomial:
        return 1 - fmap.linear
    return (1 - fmap.lam) / (1 - fmap.mu)


def critical_roots(fmap: MapSpec) -> Tuple[complex, complex]:
    """Roots of mu z^2 + 2 z + lam = 0 (rational map)."""
    mu, lam = fmap.mu, fmap.lam
    disc = cmath.sqrt(1 - mu * lam)
    r1, r2 = (-1 + disc) / mu, (-1 - disc) / mu
    # the smaller root from the product keeps full relative precision
    big, small = (r1, r2) if abs(r1) >= abs(r2) else (r2, r1)
    small = lam / (mu * big)
    return big, small


def critical_points(fmap: MapSpec, budget: int = 100000) -> List[CriticalPoint]:
    if fmap.is_polynomial:
        return [CriticalPoint("c", -fmap.linear / 2), CriticalPoint("inf", INF)]
    pd = petal_data(fmap)
    return [CriticalPoint("c0", pd.c0), CriticalPoint("cinf", pd.cinf)]


# -- petal data and classification for the rational map -----------------------

@dataclass(frozen=True)
class PetalData:
    """Everything the classifier needs about the parabolic point 0 of F and the Siegel disk at infinity."""
    p: int
    germ: ParabolicGerm
    vectors: Tuple[complex, ...]
    labels: Tuple[int, ...]        # basin index of the petal of vectors[j]
    delta: float
    x0: float
    r0: float
    c0: complex
    cinf: complex
    c0_entry: int

    def petal_of(self, z: complex) -> Optional[int]:
        r = abs(z)
        if not 0 < r < self.delta:
            return None
        u = -1.0 / (self.p * self.germ.a * z ** self.p)
        if u.real <= self.x0:
            return None
        half = petal_opening(self.p) / 2
        for j, v in enumerate(self.vectors):
            if abs(cmath.phase(z / v)) < half:
                return j
        return None


BASIN_LABELS = {kernels.UNDECIDED: "Undecided", kernels.PARABOLIC: "ParabolicBasin",
                kernels.SIEGEL: "SiegelSide"}


class BasinClass(NamedTuple):
    label: str                     # ParabolicBasin | SiegelSide | Undecided
    petal: Optional[int] = None    # basin index mod p
    step: Optional[int] = None


def _first_petal_entry(fmap: MapSpec, z: complex, vectors, delta, x0, a, p, budget):
    half = petal_opening(p) / 2
    for n in range(budget + 1):
        r = abs(z)
        if 0 < r < delta and (-1.0 / (p * a * z ** p)).real > x0:
            for j, v in enumerate(vectors):
                if abs(cmath.phase(z / v)) < half:
                    return j, n
        if cmath.isinf(z):
            return None
        z = fmap.eval(z)
    return None


def certify_siegel_radius(fmap: MapSpec, samples: int = 10000, iters: int = 10000,
                          r_max: float = 1.0, seed: int = 0) -> float:
    """Largest r on a 2^(-1/8) grid such that sampled orbits from |w| < r stay in |w| < 2r."""
    rng = np.random.default_rng(seed)
    rad = np.sqrt(rng.random(samples))
    ang = 2 * np.pi * rng.random(samples)
    unit = rad * np.exp(1j * ang)
    lam, mu = complex(fmap.lam), complex(fmap.mu)
    for k in range(0, 200):
        r = r_max * 2.0 ** (-k / 8)
        if kernels.siegel_orbits_confined(unit * r, lam, mu, iters, 2 * r):
            return r
    raise LabelingUndecided("no Siegel neighbourhood certified")


@functools.lru_cache(maxsize=16)
def petal_data(fmap: MapSpec, budget: int = 100000, siegel_samples: int = 10000,
               siegel_iters: int = 10000) -> PetalData:
    if fmap.kind != MATING:
        raise ValueError("petal data is defined for the rational map")
    p = fmap.nu.p
    germ = fit_germ(fmap, 0j, max_p=p, iterate=p)
    vecs = attracting_vectors(germ)
    # the 1%-residual germ radius is far too small for F^p; use the certified invariant radius
    delta = invariant_petal_radius(fmap, germ)
    x0 = 1.0 / (p * abs(germ.a) * delta ** p)
    roots = critical_roots(fmap)
    hits = [_first_petal_entry(fmap, c, vecs, delta, x0, germ.a, p, budget) for c in roots]
    if (hits[0] is None) == (hits[1] is None):
        raise LabelingUndecided("could not tell c0 from c_inf within %d steps" % budget)
    i0 = 0 if hits[0] is not None else 1
    c0, cinf = roots[i0], roots[1 - i0]
    j0, n0 = hits[i0]
    # c0 lies in basin 0; F rotates petal directions by lam and lowers the basin index by 1
    labels = [None] * p
    j, lab = j0, (-n0) % p
    for _ in range(p):
        labels[j] = lab
        target = vecs[j] * fmap.lam
        j = int(np.argmin([abs(target - v) for v in vecs]))
        lab = (lab - 1) % p
    if any(x is None for x in labels):
        raise LabelingUndecided("petal directions are not permuted cyclically by F")
    r0 = certify_siegel_radius(fmap, siegel_samples, siegel_iters)
    return PetalData(p, germ, tuple(vecs), tuple(labels), delta, x0, r0, c0, cinf, n0)


def classify_points(fmap: MapSpec, zs, budget: int, pd: Optional[PetalData] = None,
                    w_chart=None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised classification; returns (kind, petal index, step) arrays."""
    pd = pd or petal_data(fmap)
    zs = np.ascontiguousarray(np.asarray(zs, dtype=np.complex128).ravel())
    if w_chart is None:
        w_chart = np.full(zs.shape, complex(np.nan, np.nan))
    w_chart = np.ascontiguousarray(np.asarray(w_chart, dtype=np.complex128).ravel())
    # infinite z starts in the w-chart at 0
    inf = ~np.isfinite(zs)
    w_chart[inf] = 0j
    zs = np.where(inf, 0j, zs)
    kind = np.empty(zs.shape, dtype=np.int8)
    index = np.empty(zs.shape, dtype=np.int64)
    step = np.empty(zs.shape, dtype=np.int64)
    kernels.classify_mating(zs, w_chart, int(budget), complex(fmap.lam), complex(fmap.mu), pd.p,
                            complex(pd.germ.a), np.asarray(pd.vectors, dtype=np.complex128),
                            np.asarray(pd.labels, dtype=np.int64), pd.delta, pd.x0,
                            petal_opening(pd.p) / 2, pd.r0, kind, index, step)
    # a repelling fixed point lies in the Julia set, but rounding pushes its float orbit off it
    beta = beta_point(fmap)
    on_beta = np.abs(zs - beta) <= 1e-12 * (1 + abs(beta))
    kind[on_beta] = kernels.UNDECIDED
    index[on_beta] = -1
    step[on_beta] = budget
    return kind, index, step


def classify_point(fmap: MapSpec, z: complex, budget: int = 10000,
                   pd: Optional[PetalData] = None) -> BasinClass:
    kind, index, step = classify_points(fmap, [z], budget, pd)
    k = int(kind[0])
    if k == kernels.PARABOLIC:
        return BasinClass("ParabolicBasin", int(index[0]), int(step[0]))
    if k == kernels.SIEGEL:
        return BasinClass("SiegelSide", None, int(step[0]))
    return BasinClass("Undecided")
