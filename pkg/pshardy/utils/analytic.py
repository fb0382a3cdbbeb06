# -*- coding: utf-8 -*-
"""
函数模型：多项式 × ∏(1 - c z)^{-γ}
求值、导数、边界迹、伸缩、|f|^p 的 Laplace 密度、Taylor 截断，以及调和函数 h = Re f
"""
import cmath
import math
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError
from .kernels import TWO_PI, as_angle, as_disk

logger = logging.getLogger(__name__)

# |c| 与 1 的比较容差
UNIT_TOL = 1e-15


@dataclass(frozen=True)
class HardyExponent:
    """指数 p"""
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 0):
            raise DomainError(f"指数 p 必须为正: {self.p}")

    def require_harmonic(self) -> 'HardyExponent':
        """调和空间只处理 p > 1"""
        if not self.p > 1:
            raise DomainError(f"调和函数实验要求 p > 1，实际 p={self.p}")
        return self

    def __float__(self) -> float:
        return float(self.p)


def as_exponent(p) -> float:
    return HardyExponent(float(p)).p


@dataclass(frozen=True)
class AnalyticFunction:
    """f(z) = poly(z)·∏(1 - c_k z)^{-γ_k}，主分支在 z = 0 处取值 1"""
    poly: Tuple[complex, ...] = (1.0,)
    factors: Tuple[Tuple[complex, float], ...] = ()

    def __post_init__(self):
        poly = tuple(complex(a) for a in self.poly) or (0j,)
        factors = tuple((complex(c), float(g)) for c, g in self.factors)
        for c, g in factors:
            if abs(c) > 1.0 + UNIT_TOL:
                raise DomainError(f"因子参数必须满足 |c| <= 1: {c}")
            if not g > 0:
                raise DomainError(f"因子指数必须为正: {g}")
        object.__setattr__(self, 'poly', poly)
        object.__setattr__(self, 'factors', tuple((c, g) for c, g in factors if c != 0))

    # ---------- 构造 ----------

    @classmethod
    def polynomial(cls, coefficients: Sequence[complex]) -> 'AnalyticFunction':
        return cls(poly=tuple(coefficients))

    @classmethod
    def power_factor(cls, c: complex = 1.0, gamma: float = 0.5, poly: Sequence[complex] = (1.0,)) -> 'AnalyticFunction':
        """poly(z)·(1 - c z)^{-γ}"""
        return cls(poly=tuple(poly), factors=((complex(c), gamma),))

    def label(self) -> str:
        terms = []
        for k, a in enumerate(self.poly):
            if a == 0:
                continue
            coef = f"{a.real:g}" if a.imag == 0 else f"({a.real:g}{a.imag:+g}i)"
            terms.append(coef if k == 0 else f"{coef}z^{k}")
        text = "+".join(terms) or "0"
        for c, g in self.factors:
            text += f"*(1-{_fmt(c)}z)^-{g:g}"
        return text

    # ---------- 求值 ----------

    @property
    def degree(self) -> int:
        nz = [k for k, a in enumerate(self.poly) if a != 0]
        return nz[-1] if nz else 0

    @property
    def is_polynomial(self) -> bool:
        return not self.factors

    @property
    def regular_on_closed_disk(self) -> bool:
        """全部 |c| < 1 时在闭圆盘邻域内解析"""
        return all(abs(c) < 1.0 - UNIT_TOL for c, _ in self.factors)

    def _product(self, z):
        """∏(1 - c z)^{-γ}，可取圆外与边界点"""
        log_sum = np.zeros(np.shape(z), dtype=complex)
        with np.errstate(divide='ignore', invalid='ignore'):
            for c, g in self.factors:
                log_sum = log_sum - g * np.log(1.0 - c * z)
            return np.exp(log_sum)

    def values(self, z):
        """向量化求值，不检查定义域"""
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid='ignore', over='ignore'):
            return P.polyval(z, np.asarray(self.poly)) * self._product(z)

    def __call__(self, z):
        value = self.values(as_disk(z))
        return complex(value) if np.ndim(value) == 0 else value

    def derivative(self, z):
        """f' = poly'·F + poly·F·Σ γ c/(1 - c z)"""
        z = np.asarray(z, dtype=complex)
        coeffs = np.asarray(self.poly)
        F = self._product(z)
        poly_val = P.polyval(z, coeffs)
        dpoly = P.polyval(z, P.polyder(coeffs)) if coeffs.size > 1 else np.zeros(z.shape, dtype=complex)
        log_der = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide='ignore', invalid='ignore'):
            for c, g in self.factors:
                log_der = log_der + g * c / (1.0 - c * z)
            result = dpoly * F + poly_val * F * log_der
        return complex(result) if result.ndim == 0 else result

    def abs_power(self, p: float, z):
        """|f(z)|^p"""
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            return np.abs(self.values(z)) ** p

    def lap_density(self, p: float, z):
        """(p²/2π)|f|^{p-2}|f'|²，零点处 p < 2 时为 +inf"""
        z = np.asarray(z, dtype=complex)
        modulus = np.abs(self.values(z))
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            dens = (p * p / TWO_PI) * modulus ** (p - 2.0) * np.abs(self.derivative(z)) ** 2
        return dens

    # ---------- 边界 ----------

    def singular_angles(self) -> List[float]:
        """|c| = 1 的因子在 e^{iθ} = c̄ 处奇异"""
        angles = {round(math.atan2(-c.imag, c.real) % TWO_PI, 15)
                  for c, _ in self.factors if abs(c) >= 1.0 - UNIT_TOL}
        return sorted(angles)

    def singular_orders(self) -> Dict[float, float]:
        """每个奇异角上的 Σ γ"""
        orders: Dict[float, float] = defaultdict(float)
        for c, g in self.factors:
            if abs(c) >= 1.0 - UNIT_TOL:
                orders[round(math.atan2(-c.imag, c.real) % TWO_PI, 15)] += g
        return dict(orders)

    def classical_member(self, p: float) -> bool:
        """|f*|^p 可积当且仅当每个奇异角上 Σγ·p < 1"""
        return all(order * p < 1.0 for order in self.singular_orders().values())

    def trace(self, theta):
        """f*(e^{iθ})，奇异角处返回 inf"""
        theta = np.asarray(as_angle(theta), dtype=float)
        values = np.asarray(self.values(np.exp(1j * theta)), dtype=complex)
        bad = np.zeros(theta.shape, dtype=bool)
        for angle in self.singular_angles():
            bad |= np.abs(np.angle(np.exp(1j * (theta - angle)))) < 1e-15
        values = np.where(bad | ~np.isfinite(values), complex(np.inf, 0.0), values)
        return values

    def trace_abs_power(self, p: float, theta):
        """|f*|^p"""
        with np.errstate(over='ignore', invalid='ignore'):
            return np.abs(self.trace(theta)) ** p

    def boundary_sup(self, samples: int = 2048) -> float:
        theta = TWO_PI * np.arange(samples) / samples
        return float(np.max(np.abs(self.trace(theta))))

    # ---------- 变换 ----------

    def dilate(self, t: float) -> 'AnalyticFunction':
        """f_t(z) = f(tz)"""
        if not 0.0 < t < 1.0:
            raise DomainError(f"伸缩参数 t 必须在 (0,1) 内: {t}")
        poly = tuple(a * t ** k for k, a in enumerate(self.poly))
        factors = tuple((t * c, g) for c, g in self.factors)
        return AnalyticFunction(poly=poly, factors=factors)

    def taylor_coefficients(self, n: int) -> np.ndarray:
        """前 n+1 个 Taylor 系数"""
        if n < 0:
            raise DomainError(f"截断阶不能为负: {n}")
        coeffs = np.zeros(n + 1, dtype=complex)
        head = np.asarray(self.poly[:n + 1], dtype=complex)
        coeffs[:head.size] = head
        for c, g in self.factors:
            series = np.empty(n + 1, dtype=complex)
            series[0] = 1.0
            for k in range(1, n + 1):
                series[k] = series[k - 1] * (g + k - 1) / k * c
            coeffs = np.convolve(coeffs, series)[:n + 1]
        return coeffs

    def taylor_section(self, n: int) -> 'AnalyticFunction':
        return AnalyticFunction(poly=tuple(self.taylor_coefficients(n)))

    def zeros(self) -> List[complex]:
        """闭圆盘内的零点（只来自多项式部分）"""
        coeffs = np.trim_zeros(np.asarray(self.poly, dtype=complex), 'b')
        if coeffs.size <= 1:
            return []
        roots = np.roots(coeffs[::-1])
        return sorted((complex(z) for z in roots if abs(z) <= 1.0 + 1e-12),
                      key=lambda z: (z.real, z.imag))


def _fmt(c: complex) -> str:
    return f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}i)"


def evaluate(f: AnalyticFunction, z):
    """f(z)，|z| < 1"""
    return f(z)


def deriv(f: AnalyticFunction):
    """返回 f' 的求值器"""
    return f.derivative


def boundary_trace(f: AnalyticFunction, theta):
    value = f.trace(theta)
    if np.ndim(value) == 0:
        value = complex(value)
        return math.inf if not cmath.isfinite(value) else value
    return value


def dilate(f: AnalyticFunction, t: float) -> AnalyticFunction:
    return f.dilate(t)


def lap_density_fp(f: AnalyticFunction, p: float, z):
    """|f|^p 的归一化 Laplace 测度关于面积的密度"""
    p = as_exponent(p)
    z = as_disk(z)
    if p < 2 and np.any(np.asarray(f.values(z)) == 0):
        raise DomainError(f"p={p} < 2 时密度在 f 的零点处奇异")
    value = f.lap_density(p, z)
    return float(value) if np.ndim(value) == 0 else value


def taylor_section(f: AnalyticFunction, n: int) -> AnalyticFunction:
    return f.taylor_section(n)


@dataclass(frozen=True)
class HarmonicFunction:
    """h = Re f"""
    source: AnalyticFunction

    def __call__(self, z):
        value = np.real(self.source(z))
        return float(value) if np.ndim(value) == 0 else value

    def values(self, z):
        return np.real(self.source.values(z))

    def trace(self, theta):
        """h*(e^{iθ})，奇异角处返回 inf"""
        values = self.source.trace(theta)
        finite = np.isfinite(values)
        return np.where(finite, np.real(values), np.inf)

    def trace_abs_power(self, p: float, theta):
        with np.errstate(over='ignore', invalid='ignore'):
            return np.abs(self.trace(theta)) ** p

    def singular_angles(self) -> List[float]:
        return self.source.singular_angles()

    def label(self) -> str:
        return f"Re[{self.source.label()}]"
