#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试加权 Hardy 范数的三条路线与各项实验
"""
import math

import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma

from pshardy.utils.analytic import AnalyticFunction, HarmonicFunction
from pshardy.utils.errors import DomainError, PreconditionError
from pshardy.utils.exhaustion import Exhaustion, ExhaustionSeries
from pshardy.utils.hardy import (
    canonical_ball_experiment,
    check_dominated,
    density_study,
    dilation_study,
    equivalence_bounds,
    harmonic_norm,
    membership,
    norm_boundary,
    norm_comparison,
    norm_levels,
    norm_riesz,
    riesz_decomposition_gap,
    weakstar_study,
)
from pshardy.utils.measures import TestField

ONE_PLUS_Z = AnalyticFunction.polynomial([1, 1])
FUNCTIONS = [ONE_PLUS_Z, AnalyticFunction.polynomial([0, 0, 1]), AnalyticFunction.polynomial([3, 1, -1])]
EXHAUSTIONS = [Exhaustion.atom(0.0), Exhaustion.atom(0.5), Exhaustion.quadratic(), Exhaustion.mixed(0.5, 0.5)]


def test_anchor_norms():
    assert_allclose(norm_boundary(ONE_PLUS_Z, 2, Exhaustion.atom(0.5)).value, math.sqrt(3), atol=1e-6)
    assert_allclose(norm_boundary(ONE_PLUS_Z, 2, Exhaustion.atom(0.0)).value, math.sqrt(2), atol=1e-6)


def test_boundary_norm_of_singular_function():
    """‖(1-z)^{-3/8}‖²_{H²} = Γ(1/4)/Γ(5/8)²"""
    f = AnalyticFunction.power_factor(1.0, 0.375)
    result = norm_boundary(f, 2, Exhaustion.atom(0.0), tol=1e-9)
    assert result.finite and result.converged
    assert_allclose(result.power, gamma(0.25) / gamma(0.625) ** 2, rtol=1e-6)
    divergent = norm_boundary(f, 3, Exhaustion.atom(0.0))
    assert not divergent.finite
    assert divergent.value == math.inf


@pytest.mark.parametrize("f", FUNCTIONS, ids=lambda f: f.label())
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_riesz_route_agrees_with_boundary(f, p, u):
    boundary = norm_boundary(f, p, u, tol=1e-11)
    riesz = norm_riesz(f, p, u, tol=1e-7)
    assert abs(riesz.value - boundary.value) / boundary.value <= 1e-4


def test_riesz_route_needs_regular_function():
    with pytest.raises(DomainError):
        norm_riesz(AnalyticFunction.power_factor(1.0, 0.25), 2, Exhaustion.atom(0.0))


@pytest.mark.parametrize("f", FUNCTIONS, ids=lambda f: f.label())
@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
def test_levels_route_monotone_and_close(f, u):
    r_seq = [-0.5, -0.25, -0.125, -0.0625, -0.03125, -0.002, -0.001]
    boundary = norm_boundary(f, 2, u, tol=1e-11)
    levels = norm_levels(f, 2, u, r_seq, tol=1e-8)
    assert levels.table.monotone_flags() == {"levels": True}
    assert levels.value <= boundary.value + 1e-6
    assert abs(levels.extrapolated - boundary.value) <= 1e-3 * max(1.0, boundary.value)


def test_levels_route_below_two():
    f, u = ONE_PLUS_Z, Exhaustion.mixed(0.5, 0.5)
    boundary = norm_boundary(f, 1.0, u, tol=1e-11)
    levels = norm_levels(f, 1.0, u, [-0.25, -0.0625, -0.002, -0.001], tol=1e-8)
    assert levels.table.is_monotone("levels")
    assert abs(levels.extrapolated - boundary.value) <= 1e-3 * max(1.0, boundary.value)


def test_membership_finite_family():
    result = membership(ONE_PLUS_Z, 2, Exhaustion.atom(0.5))
    assert result.member is True
    outside = membership(AnalyticFunction.power_factor(1.0, 0.5), 2, Exhaustion.atom(0.5))
    assert outside.status == "non_member"
    assert outside.member is False


def test_strict_inclusion_witness():
    """γp = 3/4 的函数在原子级数下部分和比值趋于 √2，而经典范数有限"""
    f = AnalyticFunction.power_factor(1.0, 0.375)
    result = membership(f, 2, ExhaustionSeries.boundary_witness(), k_seq=list(range(8, 21)))
    assert result.status == "non_member"
    ratios = result.table.values("ratio")
    assert len(ratios) == 12
    for ratio in ratios:
        assert abs(ratio - math.sqrt(2)) <= 0.05
    classical = norm_boundary(f, 2, Exhaustion.atom(0.0))
    assert classical.finite and classical.converged


def test_membership_series_bounded_function():
    """有界函数在同一级数下的部分和收敛：Σ 2^{-k}(2+2a_k) = 4 - 2/7"""
    result = membership(ONE_PLUS_Z, 2, ExhaustionSeries.boundary_witness(), k_seq=list(range(4, 16)))
    assert result.status == "member"
    assert_allclose(result.table.metadata["limit_estimate"], 26.0 / 7.0, rtol=1e-3)


def test_dilations():
    u = Exhaustion.atom(0.5)
    t_seq = [0.5, 0.9, 0.99]
    table = dilation_study(ONE_PLUS_Z, 2, u, t_seq, tol=1e-12)
    norms = table.values("norm")
    diffs = table.values("difference")
    for t, norm, diff in zip(t_seq, norms, diffs):
        assert_allclose(norm ** 2, 1 + t + t * t, atol=1e-6)
        assert_allclose(diff, 1 - t, atol=1e-6)
    assert table.monotone_flags() == {"norm": True, "difference": True}


def test_dilation_requires_membership():
    with pytest.raises(PreconditionError):
        dilation_study(AnalyticFunction.power_factor(1.0, 0.5), 2, Exhaustion.atom(0.0), [0.5])


def test_canonical_balls():
    t_seq = [0.5, 0.9, 0.99, 0.999]
    table = canonical_ball_experiment(ONE_PLUS_Z, 2, t_seq, tol=1e-12)
    for t, row in zip(t_seq, table.series("ball")):
        assert_allclose(row.value, 2 + 2 * t, atol=1e-8)
        assert_allclose(row.abs_error, 2 * (1 - t), atol=1e-8)
    assert table.metadata["first_exit"] == 0.5
    assert_allclose(table.metadata["sup_norm"], 2.0)


def test_polynomial_density():
    """截断误差与几何尾项 (0.95t)^{n+1}/√(1-(0.95t)²) 同阶"""
    f = AnalyticFunction.power_factor(0.95, 1.0)
    schedule = [(1 - 2.0 ** -j, 2 ** j) for j in range(1, 9)]
    table = density_study(f, 2, Exhaustion.atom(0.0), schedule, tol=1e-12)
    sections = table.values("section")
    for (t, n), value in zip(schedule, sections):
        q = 0.95 * t
        oracle = q ** (n + 1) / math.sqrt(1 - q * q)
        assert 0.5 <= value / oracle <= 2.0
    assert sections[-1] < 1e-3
    assert table.monotone_flags()["section"]


def test_weakstar_convergence():
    u = Exhaustion.atom(0.5)
    h = HarmonicFunction(AnalyticFunction.polynomial([0, 1]))
    r_seq = [-2.0 ** -k for k in range(1, 11)]
    table = weakstar_study(u, h, TestField.modulus_squared(), 2, r_seq, tol=1e-6, grid_n=512)
    rows = table.series("weakstar")
    assert_allclose(rows[0].reference, 0.5, atol=1e-8)
    assert rows[-1].abs_error <= 1e-3
    assert rows[-1].abs_error < rows[0].abs_error
    for row in table.series("unit"):
        assert abs(row.value - 0.5) <= row.est_error + 1e-6


def test_weakstar_requires_harmonic_exponent():
    h = HarmonicFunction(AnalyticFunction.polynomial([0, 1]))
    with pytest.raises(DomainError):
        weakstar_study(Exhaustion.atom(0.5), h, TestField.constant(), 1.0, [-0.5])


def test_harmonic_norm():
    """‖Re z‖²_{u,2} = ∫cos²θ dλ = 1/2（u = log|z|）"""
    result = harmonic_norm(AnalyticFunction.polynomial([0, 1]), 2, Exhaustion.atom(0.0))
    assert_allclose(result.value, math.sqrt(0.5), atol=1e-10)
    with pytest.raises(DomainError):
        harmonic_norm(AnalyticFunction.polynomial([0, 1]), 1.0, Exhaustion.atom(0.0))


def test_norm_comparison():
    u, v = Exhaustion.quadratic(), Exhaustion.atom(0.0)
    assert check_dominated(v, u)
    assert not check_dominated(u, v)
    pair = norm_comparison(AnalyticFunction.polynomial([3, 1, -1]), 2, u, v)
    assert pair.ordered
    with pytest.raises(PreconditionError):
        norm_comparison(ONE_PLUS_Z, 2, v, u)


def test_equivalence_bounds():
    u = Exhaustion.mixed(0.5, 0.5)
    bounds = equivalence_bounds(u, 2)
    assert_allclose(bounds.lower, math.sqrt(0.5 / 3 + 0.5), rtol=1e-10)
    assert_allclose(bounds.upper, math.sqrt(0.5 * 3 + 0.5), rtol=1e-10)
    f = AnalyticFunction.polynomial([3, 1, -1])
    classical = norm_boundary(f, 2, Exhaustion.atom(0.0)).value
    weighted = norm_boundary(f, 2, u).value
    assert bounds.contains(classical, weighted)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_riesz_decomposition_gap(p):
    f, w = AnalyticFunction.polynomial([3, 1, -1]), 0.3 + 0.2j
    gap = riesz_decomposition_gap(f, p, w, tol=1e-8)
    assert abs(gap) <= 1e-5 * max(1.0, float(f.abs_power(p, w)))


@pytest.mark.parametrize("u", EXHAUSTIONS, ids=lambda u: u.label)
@pytest.mark.parametrize("p", [0.5, 2.0])
def test_riesz_route_exact_for_constants(u, p):
    result = norm_riesz(AnalyticFunction.polynomial([3.0]), p, u)
    assert result.value == 3.0
    assert result.est_error == 0.0
    assert result.converged
    assert norm_riesz(AnalyticFunction.polynomial([-2j]), p, u).value == 2.0
