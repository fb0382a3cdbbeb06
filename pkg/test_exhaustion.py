#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试穷竭函数、边界密度 α_u 与部分 Poisson 质量
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pshardy.utils.errors import DomainError
from pshardy.utils.exhaustion import (
    Exhaustion,
    ExhaustionSeries,
    alpha,
    boundary_pair,
    eval_u,
    grad_u,
    normal_derivative,
    p_r,
    p_r_report,
)
from pshardy.utils.kernels import green, poisson

EXHAUSTIONS = [
    Exhaustion.atom(0.0),
    Exhaustion.atom(0.5),
    Exhaustion.quadratic(),
    Exhaustion.mixed(0.3 + 0.2j, 0.5),
    Exhaustion.from_triples([(0.5, 0.0, 0.5), (-0.5, 0.0, 0.5)], name="pair"),
]


def test_weights_must_sum_to_one():
    with pytest.raises(DomainError):
        Exhaustion(atoms=((0.0, 0.5), (0.5, 0.4)))
    with pytest.raises(DomainError):
        Exhaustion.mixed(0.0, 1.2)
    with pytest.raises(DomainError):
        Exhaustion(atoms=((0.2, 0.5), (0.2, 0.5)))
    with pytest.raises(DomainError):
        Exhaustion.atom(1.0)
    Exhaustion(atoms=((0.0, 0.25),), quad_weight=0.75)


def test_triples_round_trip():
    u = Exhaustion.from_triples([(0.1, -0.2, 0.3)], quad_weight=0.7)
    assert u.to_triples() == [(0.1, -0.2, 0.3)]
    assert u.poles == (0.1 - 0.2j,)
    assert not u.is_atomic


def test_eval_closed_forms():
    assert_allclose(eval_u(Exhaustion.atom(0.0), 0.5), math.log(0.5), rtol=1e-15)
    assert_allclose(eval_u(Exhaustion.quadratic(), 0.6j), 0.5 * (0.36 - 1.0), rtol=1e-15)
    assert eval_u(Exhaustion.atom(0.5), 0.5) == -math.inf
    with pytest.raises(DomainError):
        eval_u(Exhaustion.quadratic(), 1.0)


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_negative_inside_and_vanishing_on_circle(u):
    rng = np.random.default_rng(3)
    z = 0.98 * np.sqrt(rng.uniform(0, 1, 400)) * np.exp(2j * math.pi * rng.uniform(0, 1, 400))
    assert np.all(eval_u(u, z) < 0)
    boundary = u.field(np.exp(1j * np.linspace(0, 2 * math.pi, 33)))
    assert_allclose(boundary, 0.0, atol=1e-14)


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_gradient_matches_central_difference(u):
    z = np.array([0.1 + 0.6j, -0.7 + 0.1j, 0.05 - 0.4j])
    h = 1e-6
    gx = (u.field(z + h) - u.field(z - h)) / (2 * h)
    gy = (u.field(z + 1j * h) - u.field(z - 1j * h)) / (2 * h)
    g = grad_u(u, z)
    assert g.shape == (3, 2)
    assert_allclose(g[:, 0], gx, rtol=1e-6, atol=1e-8)
    assert_allclose(g[:, 1], gy, rtol=1e-6, atol=1e-8)


def test_gradient_undefined_at_pole():
    assert_allclose(grad_u(Exhaustion.atom(0.0), 0.5), [2.0, 0.0])
    with pytest.raises(DomainError):
        grad_u(Exhaustion.atom(0.5), 0.5)


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_alpha_mass_and_lower_bound(u):
    density = alpha(u)
    assert_allclose(density.l1_mass, 1.0, atol=1e-10)
    assert density.lower_bound > 0
    assert density.lower_bound >= density.analytic_lower_bound - 1e-12
    assert density.upper_bound >= density.lower_bound


def test_alpha_closed_forms():
    theta = np.linspace(0, 2 * math.pi, 9)
    assert_allclose(alpha(Exhaustion.atom(0.0))(theta), 1.0)
    assert_allclose(alpha(Exhaustion.quadratic())(theta), 1.0)
    mixed = alpha(Exhaustion.mixed(0.5, 0.5))
    assert_allclose(mixed(theta), 0.5 * poisson(0.5, theta) + 0.5, rtol=1e-14)
    atom = alpha(Exhaustion.atom(0.5))
    assert_allclose(atom.lower_bound, 1.0 / 3.0, rtol=1e-12)
    assert_allclose(atom.upper_bound, 3.0, rtol=1e-12)


def test_alpha_with_peaked_pole():
    u = Exhaustion.atom(0.999 * np.exp(0.3j))
    density = alpha(u)
    assert density.peak_angles
    assert_allclose(density.l1_mass, 1.0, atol=1e-8)


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_normal_derivative_tends_to_alpha(u):
    density = alpha(u)
    for theta in (0.0, 0.9, 2.0, math.pi, 5.5):
        assert_allclose(normal_derivative(u, theta, 1.0 - 1e-6), density(theta), rtol=1e-4)


def test_boundary_pairing():
    u = Exhaustion.atom(0.5)
    assert_allclose(boundary_pair(u, np.cos, tol=1e-12), 0.5, atol=1e-12)
    assert_allclose(boundary_pair(Exhaustion.quadratic(), lambda t: np.ones_like(t)), 1.0, atol=1e-10)


def test_p_r_atomic_is_poisson():
    u = Exhaustion.atom(0.5)
    assert_allclose(p_r(u, -0.1, 0.0), 3.0, rtol=1e-15)
    with pytest.raises(DomainError):
        p_r(u, 0.0, 0.0)


def test_p_r_quadratic_closed_form():
    """均值性质：p_r = |B_{u,r}|/π = 1 + 2r"""
    u = Exhaustion.quadratic()
    for r in (-0.4, -0.1):
        for theta in (0.0, 2.0):
            assert_allclose(p_r(u, r, theta, tol=1e-9), 1.0 + 2.0 * r, atol=1e-7)


@pytest.mark.parametrize("u", [Exhaustion.quadratic(), Exhaustion.mixed(0.3 + 0.2j, 0.5)], ids=lambda u: u.label)
def test_p_r_monotone_and_bounded_by_alpha(u):
    """64 个角上 p_r 关于 r 不减且不超过 α"""
    density = alpha(u)
    r_seq = [-0.5, -0.25, -0.125]
    for theta in 2 * math.pi * np.arange(64) / 64:
        reports = [p_r_report(u, r, theta, tol=1e-7) for r in r_seq]
        for prev, cur in zip(reports, reports[1:]):
            assert cur.value >= prev.value - prev.est_error - cur.est_error - 1e-12
        assert reports[-1].value <= density(theta) + reports[-1].est_error + 1e-12


def test_series_weights_and_poles():
    series = ExhaustionSeries.boundary_witness()
    assert series.pole(1) == 0.75
    assert series.pole(2) == 1 - 1 / 16
    assert_allclose([series.weight(k) for k in (1, 2, 3)], [0.5, 0.25, 0.125])
    truncated = series.truncate(10)
    assert len(truncated.atoms) == 10
    assert math.fsum(c for _, c in truncated.atoms) == 1.0
    with pytest.raises(DomainError):
        series.truncate(0)
    with pytest.raises(DomainError):
        ExhaustionSeries(pole_base=1.0)


def test_series_alpha_unbounded_at_zero():
    """c_k P(a_k, 1) = 2^{-k}(2-4^{-k})4^k，部分和每步约翻倍"""
    series = ExhaustionSeries.boundary_witness()
    ratio = series.partial_alpha(12, 0.0) / series.partial_alpha(11, 0.0)
    assert_allclose(ratio, 2.0, rtol=1e-3)
    away = [series.partial_alpha(K, math.pi) for K in (10, 20)]
    assert_allclose(away[0], away[1], rtol=1e-2)


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_increasing_along_rays_outside_poles(u):
    """|z| > max|a_j| 时 u 沿射线严格递增"""
    start = max([abs(a) for a in u.poles], default=0.0) + 0.02
    s = np.linspace(start, 0.999, 60)
    for phi in 2 * math.pi * np.arange(8) / 8:
        values = eval_u(u, s * np.exp(1j * phi))
        assert np.all(np.diff(values) > 0)


def test_series_partial_sums_monotone_in_order():
    series = ExhaustionSeries.boundary_witness()
    theta = np.array([0.0, 0.3, 1.0, math.pi])
    z = np.array([0.0, 0.5j, -0.7 + 0.1j, 0.9])
    alphas = [series.partial_alpha(K, theta) for K in range(1, 16)]
    fields = [sum(series.weight(k) * green(z, series.pole(k)) for k in range(1, K + 1)) for K in range(1, 16)]
    for prev, cur in zip(alphas, alphas[1:]):
        assert np.all(cur > prev)
    for prev, cur in zip(fields, fields[1:]):
        assert np.all(cur <= prev)
