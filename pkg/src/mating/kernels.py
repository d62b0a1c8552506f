"""Compiled per-point iteration loops shared by classification and rendering.

All loops are pure functions of their arguments (no shared state), so they can
run on many threads at once (``nogil``).
"""
import numba
import numpy as np

UNDECIDED = 0
PARABOLIC = 1
SIEGEL = 2


@numba.njit(cache=True, nogil=True)
def _mating_step(z, w, in_w, lam, mu):
    """One step of F on the sphere; returns (z, w, in_w) with the chart switched at |z| = 2."""
    if in_w:
        # w-chart: G(w) = w (w + mu) / (1 + lam w)
        den = 1.0 + lam * w
        w = w * (w + mu) / den
        if abs(w) > 0.5:
            return 1.0 / w, w, False
        return z, w, True
    den = 1.0 + mu * z
    num = lam * z + z * z
    if num == 0:
        return 0j, w, False
    if abs(den) < 0.5 * abs(num):
        w = den / num
        return z, w, True
    z = num / den
    return z, w, False


@numba.njit(cache=True, nogil=True)
def classify_mating(zs, w_start, budget, lam, mu, p, a, vecs, labels, delta, x0, half_alpha, r0,
                    kind, index, step):
    """Classify points of the sphere under F.

    ``zs`` holds z-chart starts; entries with ``w_start`` finite (not nan) start in the
    w-chart instead. Results go to kind/index/step.
    """
    for k in range(zs.shape[0]):
        z = zs[k]
        w = w_start[k]
        in_w = not np.isnan(w.real)
        if not in_w and abs(z) > 2.0:
            w = 1.0 / z
            in_w = True
        kind[k] = UNDECIDED
        index[k] = -1
        step[k] = budget
        for n in range(budget + 1):
            if in_w:
                if abs(w) < r0:
                    kind[k] = SIEGEL
                    step[k] = n
                    break
            else:
                r = abs(z)
                if r < delta and r > 0:
                    u = -1.0 / (p * a * z ** p)
                    if u.real > x0:
                        for j in range(vecs.shape[0]):
                            ang = np.angle(z / vecs[j])
                            if abs(ang) < half_alpha:
                                kind[k] = PARABOLIC
                                index[k] = (labels[j] + n) % p
                                step[k] = n
                                break
                        if kind[k] == PARABOLIC:
                            break
            if n == budget:
                break
            z, w, in_w = _mating_step(z, w, in_w, lam, mu)


@numba.njit(cache=True, nogil=True)
def escape_times(zs, lam, maxiter, radius, out):
    """First n >= 1 with |f^n(z)| > radius for f(z) = lam z + z^2; maxiter+1 if none."""
    for k in range(zs.shape[0]):
        z = zs[k]
        out[k] = maxiter + 1
        for n in range(1, maxiter + 1):
            z = lam * z + z * z
            if abs(z) > radius:
                out[k] = n
                break


@numba.njit(cache=True, nogil=True)
def siegel_orbits_confined(ws, lam, mu, iters, bound):
    """True iff every w-chart orbit stays inside |w| < bound for ``iters`` steps."""
    for k in range(ws.shape[0]):
        w = ws[k]
        for n in range(iters):
            w = w * (w + mu) / (1.0 + lam * w)
            if abs(w) >= bound:
                return False
    return True


@numba.njit(cache=True, nogil=True)
def quad_newton(s, k, c, target, iters):
    """Newton for g^k(s) = target with g(s) = s^2 + c; returns (s, converged)."""
    for _ in range(iters):
        v = s
        d = 1.0 + 0j
        for _ in range(k):
            d = 2.0 * v * d
            v = v * v + c
        if d == 0 or not np.isfinite(v.real) or not np.isfinite(v.imag):
            return s, False
        step = (v - target) / d
        s -= step
        if abs(step) <= 1e-15 * (1.0 + abs(s)):
            return s, True
    return s, False


@numba.njit(cache=True, nogil=True)
def quad_iterate(s, k, c):
    for _ in range(k):
        s = s * s + c
    return s
