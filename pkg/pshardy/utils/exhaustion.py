# -*- coding: utf-8 -*-
"""
穷竭函数子族
u(z) = Σ c_j G(z, a_j) + c_q (|z|²-1)/2，以及由 u 直接导出的量：
子水平集、边界密度 α_u、部分 Poisson 质量 p_r
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, QuadratureBudgetError
from .kernels import PEAK_RADIUS, as_angle, as_disk, green_kernel, poisson_kernel
from .quadrature import QuadratureReport, Region, disk_integrate, periodic_integrate

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# 权重和与 1 的允许偏差
WEIGHT_SUM_TOL = 1e-12

# α 的采样下界使用的角度数
ALPHA_SAMPLES = 4096


@dataclass(frozen=True)
class Exhaustion:
    """有限个 Green 原子加二次径向分量"""
    atoms: Tuple[Tuple[complex, float], ...] = ()
    quad_weight: float = 0.0
    name: str = ""

    def __post_init__(self):
        atoms = tuple((complex(a), float(c)) for a, c in self.atoms)
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'quad_weight', float(self.quad_weight))

        if self.quad_weight < 0:
            raise DomainError(f"二次分量权重不能为负: {self.quad_weight}")
        for a, c in atoms:
            if not abs(a) < 1.0:
                raise DomainError(f"极点 {a} 不在单位圆盘内")
            if not c > 0:
                raise DomainError(f"原子权重必须为正: {c}")
        poles = [a for a, _ in atoms]
        if len(set(poles)) != len(poles):
            raise DomainError("极点必须互不相同")
        total = math.fsum([c for _, c in atoms] + [self.quad_weight])
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"权重和必须为 1，实际 {total:.15g}")

    # ---------- 构造 ----------

    @classmethod
    def atom(cls, pole: complex = 0.0) -> 'Exhaustion':
        """单个 Green 原子 G(·, pole)；pole = 0 即 log|z|"""
        return cls(atoms=((complex(pole), 1.0),), name=f"atom({_fmt(pole)})")

    @classmethod
    def quadratic(cls) -> 'Exhaustion':
        return cls(quad_weight=1.0, name="quad")

    @classmethod
    def mixed(cls, pole: complex = 0.0, weight: float = 0.5) -> 'Exhaustion':
        """weight·G(·, pole) + (1-weight)·(|z|²-1)/2"""
        return cls(atoms=((complex(pole), weight),), quad_weight=1.0 - weight,
                   name=f"mixed({_fmt(pole)},{weight:g})")

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[float]], quad_weight: float = 0.0,
                     name: str = "") -> 'Exhaustion':
        """由 (re, im, weight) 三元组构造"""
        atoms = tuple((complex(re, im), w) for re, im, w in triples)
        return cls(atoms=atoms, quad_weight=quad_weight, name=name)

    def to_triples(self) -> List[Tuple[float, float, float]]:
        return [(a.real, a.imag, c) for a, c in self.atoms]

    # ---------- 基本属性 ----------

    @property
    def poles(self) -> Tuple[complex, ...]:
        return tuple(a for a, _ in self.atoms)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        parts = [f"{c:g}G({_fmt(a)})" for a, c in self.atoms]
        if self.quad_weight:
            parts.append(f"{self.quad_weight:g}Q")
        return "+".join(parts)

    @property
    def is_atomic(self) -> bool:
        return self.quad_weight == 0.0

    def field(self, z):
        """u 的向量化求值，不检查定义域（圆外为正，极点处 -inf）"""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape)
        for a, c in self.atoms:
            total = total + c * green_kernel(z, a)
        if self.quad_weight:
            total = total + self.quad_weight * 0.5 * (np.abs(z) ** 2 - 1.0)
        return total

    def gradient(self, z):
        """∇u 的复数形式 ∂x u + i ∂y u"""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide='ignore', invalid='ignore'):
            for a, c in self.atoms:
                total = total + c * (1.0 / np.conj(z - a) + a / (1.0 - a * np.conj(z)))
        if self.quad_weight:
            total = total + self.quad_weight * z
        return total

    def sublevel(self, r: float) -> Region:
        """B_{u,r} = {u < r}，极点作为锚点"""
        return Region.sublevel(self.field, r, anchors=self.poles)

    def peak_angles(self) -> List[float]:
        """α 中宽度小于 1-|a| 的尖峰中心"""
        return [math.atan2(a.imag, a.real) for a in self.poles if abs(a) > PEAK_RADIUS]

    def alpha_values(self, theta):
        """α_u(θ) = Σ c_j P(a_j, θ) + c_q"""
        theta = np.asarray(theta, dtype=float)
        total = np.full(theta.shape, self.quad_weight)
        for a, c in self.atoms:
            total = total + c * poisson_kernel(a, theta)
        return total

    def analytic_lower_bound(self) -> float:
        """逐点 Poisson 下界 c_q + Σ c_j (1-|a_j|)/(1+|a_j|)"""
        return self.quad_weight + math.fsum(c * (1 - abs(a)) / (1 + abs(a)) for a, c in self.atoms)


def _fmt(a: complex) -> str:
    a = complex(a)
    if a.imag == 0:
        return f"{a.real:g}"
    return f"{a.real:g}{a.imag:+g}i"


def eval_u(u: Exhaustion, z):
    """u(z)，|z| < 1"""
    z = as_disk(z)
    value = u.field(z)
    return float(value) if np.ndim(value) == 0 else value


def grad_u(u: Exhaustion, z):
    """∇u(z)，返回 (∂x u, ∂y u)，最后一维为分量"""
    z = as_disk(z)
    if any(np.any(np.asarray(z) == a) for a in u.poles):
        raise DomainError(f"梯度在极点处无定义")
    g = u.gradient(z)
    return np.stack([np.real(g), np.imag(g)], axis=-1)


def normal_derivative(u: Exhaustion, theta, s: float):
    """差商 u(se^{iθ})/(s-1)，s → 1⁻ 时趋于 α_u(θ)"""
    if not 0.0 < s < 1.0:
        raise DomainError(f"s 必须在 (0,1) 内: {s}")
    theta = np.asarray(as_angle(theta), dtype=float)
    value = u.field(s * np.exp(1j * theta)) / (s - 1.0)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class BoundaryDensity:
    """α_u 及其质量、下界"""
    evaluator: Callable[[np.ndarray], np.ndarray]
    l1_mass: float
    lower_bound: float
    peak_angles: Tuple[float, ...] = ()
    analytic_lower_bound: float = 0.0
    mass_report: Optional[QuadratureReport] = None

    def __call__(self, theta):
        value = self.evaluator(np.asarray(as_angle(theta), dtype=float))
        return float(value) if np.ndim(value) == 0 else value

    @property
    def upper_bound(self) -> float:
        """采样最大值（有界 α 的等价常数用）"""
        theta = TWO_PI * np.arange(ALPHA_SAMPLES) / ALPHA_SAMPLES
        theta = np.concatenate([theta, np.asarray(self.peak_angles, dtype=float)])
        return float(np.max(self.evaluator(theta)))


def alpha(u: Exhaustion, tol: Optional[float] = None) -> BoundaryDensity:
    """边界密度 α_u，质量由周期积分计算"""
    peaks = tuple(u.peak_angles())
    report = periodic_integrate(u.alpha_values, tol=tol, singular_angles=peaks)
    if abs(report.value - 1.0) > 1e-8:
        logger.warning(f"α 质量偏离 1: {report.value:.15g} ({u.label})")

    theta = TWO_PI * np.arange(ALPHA_SAMPLES) / ALPHA_SAMPLES
    lower = float(np.min(u.alpha_values(theta)))
    return BoundaryDensity(
        evaluator=u.alpha_values,
        l1_mass=report.value,
        lower_bound=lower,
        peak_angles=peaks,
        analytic_lower_bound=u.analytic_lower_bound(),
        mass_report=report,
    )


def p_r_report(u: Exhaustion, r: float, theta, tol: Optional[float] = None) -> QuadratureReport:
    """部分 Poisson 质量的积分报告"""
    if not r < 0:
        raise DomainError(f"r 必须为负: {r}")
    theta = float(as_angle(theta))
    atomic = math.fsum(c * poisson_kernel(a, theta) for a, c in u.atoms)
    if not u.quad_weight:
        return QuadratureReport.exact(atomic)

    def density(z):
        return poisson_kernel(z, theta) / math.pi

    area = disk_integrate(density, region=u.sublevel(r), tol=tol)
    return area.scaled(u.quad_weight, shift=atomic)


def p_r(u: Exhaustion, r: float, theta, tol: Optional[float] = None) -> float:
    """p_r(θ) = ∫_{B_{u,r}} P(z, e^{iθ}) Δu(z)，不超过 α(θ)"""
    report = p_r_report(u, r, theta, tol=tol)
    if not report.converged:
        raise QuadratureBudgetError(f"p_r 面积分未收敛: r={r}", report=report)
    return report.value


def boundary_pair_report(u: Exhaustion, g: Callable, tol: Optional[float] = None,
                         singular_angles: Iterable[float] = ()) -> QuadratureReport:
    angles = list(singular_angles) + list(u.peak_angles())

    def integrand(theta):
        return np.asarray(g(theta), dtype=float) * u.alpha_values(theta)

    return periodic_integrate(integrand, tol=tol, singular_angles=angles)


def boundary_pair(u: Exhaustion, g: Callable, tol: Optional[float] = None,
                  singular_angles: Iterable[float] = ()) -> float:
    """μ_u(g) = ∫ g α_u dλ"""
    report = boundary_pair_report(u, g, tol=tol, singular_angles=singular_angles)
    if not report.converged:
        raise QuadratureBudgetError(f"边界配对未收敛 ({u.label})", report=report)
    return report.value


@dataclass(frozen=True)
class ExhaustionSeries:
    """
    无穷原子级数 a_k = 1 - q^k, c_k = (1-ρ)ρ^{k-1}（k ≥ 1，Σ c_k = 1）
    只以截断形式使用
    """
    pole_base: float = 0.25
    weight_base: float = 0.5
    name: str = "series"

    def __post_init__(self):
        if not 0.0 < self.pole_base < 1.0:
            raise DomainError(f"pole_base 必须在 (0,1) 内: {self.pole_base}")
        if not 0.0 < self.weight_base < 1.0:
            raise DomainError(f"weight_base 必须在 (0,1) 内: {self.weight_base}")

    @classmethod
    def boundary_witness(cls) -> 'ExhaustionSeries':
        """a_k = 1 - 4^{-k}, c_k = 2^{-k}，α 在 θ = 0 附近无界"""
        return cls(pole_base=0.25, weight_base=0.5, name="boundary_witness")

    def pole(self, k: int) -> complex:
        return complex(1.0 - self.pole_base ** k)

    def weight(self, k: int) -> float:
        return (1.0 - self.weight_base) * self.weight_base ** (k - 1)

    def truncate(self, K: int) -> Exhaustion:
        """前 K 个原子，权重重新归一"""
        if K < 1:
            raise DomainError(f"截断阶必须 >= 1: {K}")
        raw = [self.weight(k) for k in range(1, K + 1)]
        total = math.fsum(raw)
        weights = [w / total for w in raw]
        # 归一化后的舍入误差并入最后一个权重
        weights[-1] = 1.0 - math.fsum(weights[:-1])
        atoms = tuple((self.pole(k), w) for k, w in zip(range(1, K + 1), weights))
        return Exhaustion(atoms=atoms, name=f"{self.name}[K={K}]")

    def partial_alpha(self, K: int, theta):
        """未归一的部分和 Σ_{k≤K} c_k P(a_k, θ)"""
        theta = np.asarray(as_angle(theta), dtype=float)
        total = np.zeros(theta.shape)
        for k in range(1, K + 1):
            total = total + self.weight(k) * poisson_kernel(self.pole(k), theta)
        return float(total) if total.ndim == 0 else total
