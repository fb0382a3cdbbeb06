# -*- coding: utf-8 -*-
"""
Poisson 核与 Green 核
约定：λ 为归一化弧长（总质量 1），Δ 取 (1/2π)·经典 Laplace 算子
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .errors import DomainError, QuadratureBudgetError
from .quadrature import QuadratureReport, periodic_integrate

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# |z| 超过该值时 Poisson 核在 arg z 处形成尖峰，按奇异角交给分级细分
PEAK_RADIUS = 0.99


@dataclass(frozen=True)
class DiskPoint:
    """单位圆盘内的点"""
    value: complex

    def __post_init__(self):
        value = complex(self.value)
        if not abs(value) < 1.0:
            raise DomainError(f"点 {value} 不在单位圆盘内")
        object.__setattr__(self, 'value', value)

    def __complex__(self) -> complex:
        return self.value


@dataclass(frozen=True)
class BoundaryAngle:
    """单位圆上的角，归约到 [0, 2π)"""
    theta: float

    def __post_init__(self):
        object.__setattr__(self, 'theta', float(self.theta) % TWO_PI)

    def __float__(self) -> float:
        return self.theta

    @property
    def point(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


PointLike = Union[complex, float, DiskPoint, np.ndarray]
AngleLike = Union[float, BoundaryAngle, np.ndarray]


def as_disk(z: PointLike):
    """转为复数（或复数组）并检查 |z| < 1"""
    if isinstance(z, DiskPoint):
        return z.value
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.abs(arr) < 1.0):
        raise DomainError(f"点不在单位圆盘内: max|z| = {float(np.max(np.abs(arr))):.17g}")
    return complex(arr) if arr.ndim == 0 else arr


def as_angle(theta: AngleLike):
    if isinstance(theta, BoundaryAngle):
        return theta.theta
    arr = np.asarray(theta, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def poisson_kernel(z, theta):
    """P(z, e^{iθ}) = (1-|z|²)/|e^{iθ}-z|²，不做定义域检查"""
    z = np.asarray(z, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    result = (1.0 - np.abs(z) ** 2) / np.abs(np.exp(1j * theta) - z) ** 2
    return float(result) if result.ndim == 0 else result


def poisson(z: PointLike, theta: AngleLike):
    """Poisson 核，对 dλ 积分为 1"""
    return poisson_kernel(as_disk(z), as_angle(theta))


def green_kernel(z, w):
    """
    G(z,w) = log|(z-w)/(1-w̄z)|，不做定义域检查（圆外为正）

    两点相近时直接取对数；比值接近 1 时用
    1 - |M|² = (1-|z|²)(1-|w|²)/|1-w̄z|² 配合 log1p 保持精度。
    分母写成 |z-w|² + (1-|z|²)(1-|w|²)（等于 |1-w̄z|²），
    每一步都是对称运算，所以结果对 z、w 逐位对称。z = w 时返回 -inf。
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide='ignore', invalid='ignore'):
        num = np.abs(z - w) ** 2
        defect = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2)
        den = num + defect
        near = 0.5 * np.log(num / den)
        gap = defect / den
        far = 0.5 * np.log1p(-np.minimum(gap, 1.0))
        result = np.where(num < 0.5 * den, near, far)
        result = np.where(num == 0, -np.inf, result)
    return float(result) if result.ndim == 0 else result


def green(z: PointLike, w: PointLike):
    """圆盘 Green 核，z = w 时返回 -inf"""
    return green_kernel(as_disk(z), as_disk(w))


def green_normal_derivative(w: PointLike, theta: AngleLike, s: float) -> float:
    """差商 G(se^{iθ}, w)/(s-1)，s → 1⁻ 时趋于 P(w, e^{iθ})"""
    if not 0.0 < s < 1.0:
        raise DomainError(f"s 必须在 (0,1) 内: {s}")
    w = as_disk(w)
    theta = as_angle(theta)
    return green_kernel(s * np.exp(1j * np.asarray(theta)), w) / (s - 1.0)


def harmonic_extension_report(g: Callable, z: PointLike, tol: Optional[float] = None,
                              singular_angles: Iterable[float] = ()) -> QuadratureReport:
    """∫ g(θ) P(z, e^{iθ}) dλ(θ) 的积分报告"""
    z = as_disk(z)
    angles = list(singular_angles)
    if abs(z) > PEAK_RADIUS:
        angles.append(math.atan2(z.imag, z.real))

    def integrand(theta):
        return np.asarray(g(theta), dtype=float) * poisson_kernel(z, theta)

    return periodic_integrate(integrand, tol=tol, singular_angles=angles)


def harmonic_extension(g: Callable, z: PointLike, tol: Optional[float] = None,
                       singular_angles: Iterable[float] = ()) -> float:
    """边界函数 g 在 z 处的 Poisson 积分"""
    report = harmonic_extension_report(g, z, tol=tol, singular_angles=singular_angles)
    if not report.converged:
        raise QuadratureBudgetError(
            f"Poisson 积分未收敛: z={complex(z)}, 误差估计 {report.est_error:.3g}", report=report
        )
    return report.value


def poisson_convolve(t: float, phi: AngleLike, z: PointLike, tol: Optional[float] = None) -> float:
    """∫ P(te^{iφ}, e^{iθ}) P(z, e^{iθ}) dλ(θ)，等于 P(tz, e^{iφ})"""
    if not 0.0 < t < 1.0:
        raise DomainError(f"t 必须在 (0,1) 内: {t}")
    phi = as_angle(phi)
    center = t * complex(math.cos(phi), math.sin(phi))
    angles = [phi] if t > PEAK_RADIUS else []

    def g(theta):
        return poisson_kernel(center, theta)

    return harmonic_extension(g, z, tol=tol, singular_angles=angles)
