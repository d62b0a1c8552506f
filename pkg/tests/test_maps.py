import cmath
import math

import numpy as np
import pytest

from mating import kernels
from mating.maps import (BUDGET_EXHAUSTED, ENTERED_PETAL, ESCAPED, INF, MATING, MapSpec,
                         MatingRational, ParaQuad, SiegelQuad, beta_point, classify_point,
                         classify_points, critical_points, critical_roots, fixed_points, orbit,
                         petal_data)

GOLDEN = SiegelQuad("golden")
PARA = ParaQuad("3/5")
MATE = MatingRational("golden", "3/5")


def test_map_constructors_validate():
    with pytest.raises(ValueError):
        MapSpec(MATING, theta=None, nu=None)
    assert MATE.to_dict() == {"kind": "mating", "theta": "golden", "nu": "3/5"}
    assert MapSpec.from_dict(MATE.to_dict()) == MATE


def test_fixed_point_zero():
    assert PARA.eval(0j) == 0
    assert MATE.eval(0j) == 0
    assert MATE.eval(INF) == INF


def test_polynomial_fixed_points():
    lam = cmath.exp(2j * math.pi * 3 / 5)
    fps = fixed_points(PARA)
    assert fps[0].kind == "parabolic" and abs(fps[0].multiplier - lam) < 1e-15
    assert abs(fps[1].location - (1 - lam)) < 1e-15
    for f in fps[:2]:
        assert abs(PARA.eval(f.location) - f.location) < 1e-14
    g = fixed_points(GOLDEN)
    assert g[0].kind == "Siegel" and g[1].kind == "repelling"
    assert abs(g[1].multiplier) > 1


def test_mating_fixed_points():
    fps = {f.kind: f for f in fixed_points(MATE)}
    b = fps["repelling"].location
    assert abs(MATE.eval(b) - b) < 1e-12
    assert abs(fps["repelling"].multiplier) > 1
    assert abs(abs(fps["parabolic"].multiplier) - 1) < 1e-15
    assert abs(abs(fps["Siegel"].multiplier) - 1) < 1e-15
    lam, mu = MATE.lam, MATE.mu
    assert abs(b - (1 - lam) / (1 - mu)) < 1e-15


def test_w_chart_multiplier_at_infinity():
    # 1/F(1/w) = w (w + mu) / (1 + lam w): the linear term is mu w, so arg drift is +2 pi theta
    mu = MATE.mu
    for w in (1e-4, 1e-6j, 1e-8 * (1 + 1j)):
        g = MATE.eval_w(w)
        assert abs(abs(g / w) - 1) < 1e-3
        assert abs(cmath.phase(g / w) - cmath.phase(mu)) < 1e-3
    assert abs(1 / MATE.eval(1 / 1e-7) / 1e-7 - mu) < 1e-6


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(3)
    for fmap in (GOLDEN, PARA, MATE):
        for _ in range(1000):
            z = complex(*rng.uniform(-2, 2, 2))
            if fmap is MATE and abs(1 + MATE.mu * z) < 0.2:
                continue
            h = 1e-6 * max(1, abs(z))
            fd = (fmap.eval(z + h) - fmap.eval(z - h)) / (2 * h)
            d = fmap.eval_derivative(z)
            assert abs(fd - d) <= 1e-6 * max(1, abs(d))


def test_pole_goes_to_infinity():
    pole = -1 / MATE.mu
    assert MATE.eval(pole) == INF or abs(MATE.eval(pole)) > 1e12


def test_critical_points_polynomials():
    c = critical_points(GOLDEN)[0].location
    assert abs(c + GOLDEN.mu / 2) < 1e-15
    assert abs(GOLDEN.eval_derivative(c)) < 1e-14
    c = critical_points(PARA)[0].location
    assert abs(PARA.eval_derivative(c)) < 1e-14


def test_critical_points_mating():
    for c in critical_roots(MATE):
        assert abs(MATE.eval_derivative(c)) < 1e-10
    cps = {c.label: c.location for c in critical_points(MATE)}
    rec = orbit(MATE, cps["c0"], 20000)
    # parabolic convergence is slow, |z_n| ~ n^(-1/5)
    mags = [abs(rec.points[n]) for n in (2000, 5000, 20000)]
    assert mags[0] > mags[1] > mags[2] and mags[2] < 0.1
    rec = orbit(MATE, cps["cinf"], 20000)
    assert min(abs(z) for z in rec.points[100:]) > 0.05


def test_orbit_examples():
    f0 = ParaQuad("0")
    rec = orbit(f0, -0.5, 3)
    assert rec.points == (-0.5, -0.25, -0.1875, -0.15234375)
    assert rec.stop_reason.kind == BUDGET_EXHAUSTED
    rec = orbit(f0, 3.0, 10, escape_radius=100)
    assert rec.stop_reason.kind == ESCAPED and len(rec.points) == 3
    assert set(orbit(PARA, 0j, 5).points) == {0j}


def test_orbit_petal_stop():
    pd = petal_data(MATE)
    rec = orbit(MATE, pd.c0, 2000, petals=pd)
    assert rec.stop_reason.kind == ENTERED_PETAL
    assert rec.stop_reason.step == pd.c0_entry
    # c0 defines basin 0
    assert rec.stop_reason.petal == 0


def test_classify_examples():
    pd = petal_data(MATE)
    c0 = classify_point(MATE, pd.c0, budget=10000)
    assert c0.label == "ParabolicBasin" and c0.petal == 0
    assert classify_point(MATE, INF).label == "SiegelSide"
    b = beta_point(MATE)
    for budget in (100, 1000, 10000):
        assert classify_point(MATE, b, budget=budget).label == "Undecided"


def test_basin_index_follows_the_cycle():
    # F maps basin i to basin i - 1
    pd = petal_data(MATE)
    rng = np.random.default_rng(5)
    zs = rng.uniform(-1.5, 1.5, 400) + 1j * rng.uniform(-1.5, 1.5, 400)
    k0, i0, s0 = classify_points(MATE, zs, 3000, pd)
    k1, i1, s1 = classify_points(MATE, [MATE.eval(z) for z in zs], 3000, pd)
    both = (k0 == kernels.PARABOLIC) & (k1 == kernels.PARABOLIC)
    assert both.sum() > 50
    assert np.all(i1[both] == (i0[both] - 1) % pd.p)


def test_budget_stability_sample():
    pd = petal_data(MATE)
    xs = np.linspace(-3, 3, 60)
    zs = (xs[None, :] + 1j * xs[:, None]).ravel()
    a, _, _ = classify_points(MATE, zs, 500, pd)
    b, _, _ = classify_points(MATE, zs, 1000, pd)
    decided = (a != kernels.UNDECIDED)
    assert np.all(a[decided] == b[decided])


def test_petal_data_shape():
    pd = petal_data(MATE)
    assert pd.p == 5 and sorted(pd.labels) == list(range(5))
    for v in pd.vectors:
        assert abs(pd.p * pd.germ.a * v ** pd.p + 1) < 1e-12
    assert pd.r0 > 0


def test_bounded_type_flag():
    assert GOLDEN.bounded_type is True
    assert PARA.bounded_type is None
