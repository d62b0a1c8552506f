"""Truncated power series over complex floats (coefficient arrays, index = power)."""
from __future__ import annotations

import numpy as np


def trunc(a, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    a = np.asarray(a, dtype=complex)[:n]
    out[: len(a)] = a
    return out


def mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return trunc(np.convolve(a[:n], b[:n]), n)


def inv(a: np.ndarray, n: int) -> np.ndarray:
    """1/a; requires a[0] != 0."""
    a = trunc(a, n)
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1: k + 1], out[k - 1:: -1][:k]) / a[0]
    return out


def compose(outer: np.ndarray, inner: np.ndarray, n: int) -> np.ndarray:
    """outer(inner(w)); requires inner[0] == 0."""
    if abs(inner[0]) != 0:
        raise ValueError("inner series must vanish at 0")
    inner = trunc(inner, n)
    out = np.zeros(n, dtype=complex)
    for c in trunc(outer, n)[::-1]:
        out = mul(out, inner, n)
        out[0] += c
    return out


def log1p(u: np.ndarray, n: int) -> np.ndarray:
    """log(1 + u); requires u[0] == 0."""
    u = trunc(u, n)
    out = np.zeros(n, dtype=complex)
    power = u.copy()
    for m in range(1, n):
        if not power.any():
            break
        out += ((-1) ** (m + 1) / m) * power
        power = mul(power, u, n)
    return out


def exp0(s: np.ndarray, n: int) -> np.ndarray:
    """exp(s); requires s[0] == 0."""
    s = trunc(s, n)
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0
    term = out.copy()
    for m in range(1, n):
        term = mul(term, s, n) / m
        if not term.any():
            break
        out += term
    return out


def iterate(h: np.ndarray, times: int, n: int) -> np.ndarray:
    """h composed with itself ``times`` times; h[0] must be 0."""
    out = trunc([0.0, 1.0], n)
    for _ in range(times):
        out = compose(h, out, n)
    return out
