# -*- coding: utf-8 -*-
"""
Demailly 测度 μ_{u,r}
两条计算路线：Lelong-Jensen（子水平集上的面积分）与等值线（|∇u|/2π 乘弧长）
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..config.solver_config import get_active_config
from .analytic import AnalyticFunction, as_exponent
from .errors import DegenerateLevelError, DomainError, PreconditionError, QuadratureBudgetError
from .exhaustion import Exhaustion, boundary_pair_report
from .kernels import TWO_PI
from .quadrature import (
    QuadratureReport,
    contour_integrate,
    contour_integrate_curved,
    disk_integrate,
    effective_tolerance,
    trace_levelset,
)
from .tables import ConvergenceTable

logger = logging.getLogger(__name__)

ROUTE_LJ = "lelong_jensen"
ROUTE_CONTOUR = "contour"


@dataclass(frozen=True)
class TestField:
    """
    测试函数 φ

    value 在闭圆盘上可求值；lap_density 为归一化 Laplace 密度，None 表示调和
    """
    value: Callable[[np.ndarray], np.ndarray]
    lap_density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    singular_points: Tuple[complex, ...] = ()
    name: str = "phi"
    continuous_on_closure: bool = True

    __test__ = False

    @property
    def harmonic(self) -> bool:
        return self.lap_density is None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(np.asarray(self.value(z), dtype=float), z.shape)

    def boundary(self, theta):
        """φ 在单位圆上的限制"""
        return self(np.exp(1j * np.asarray(theta, dtype=float)))

    @classmethod
    def constant(cls, c: float = 1.0) -> 'TestField':
        return cls(value=lambda z: np.full(np.shape(z), float(c)), name=f"const({c:g})")

    @classmethod
    def harmonic_field(cls, fn: Callable, name: str = "h") -> 'TestField':
        """标记为调和的 φ；先在小圆上验证均值性质"""
        field = cls(value=fn, name=name)
        if not field.check_harmonic():
            raise PreconditionError(f"测试函数 {name} 不满足均值性质，不能标记为调和")
        return field

    @classmethod
    def modulus_squared(cls) -> 'TestField':
        """|z|²，Δ 密度 2/π"""
        return cls(value=lambda z: np.abs(z) ** 2,
                   lap_density=lambda z: np.full(np.shape(z), 2.0 / math.pi),
                   name="|z|^2")

    @classmethod
    def from_analytic(cls, f: AnalyticFunction, p: float) -> 'TestField':
        """|f|^p，p < 2 时零点作为奇点"""
        p = as_exponent(p)
        if not f.regular_on_closed_disk:
            raise DomainError("边界奇异的函数不能作为闭圆盘上的测试函数")
        zeros = tuple(f.zeros()) if p < 2 else ()
        if f.degree == 0 and f.is_polynomial:
            c = abs(f.poly[0]) ** p
            return cls(value=lambda z: np.full(np.shape(z), c), name=f"|{f.label()}|^{p:g}")
        return cls(value=lambda z: f.abs_power(p, z),
                   lap_density=lambda z: f.lap_density(p, z),
                   singular_points=zeros,
                   name=f"|{f.label()}|^{p:g}")

    def product(self, other: Callable, name: str = "") -> 'TestField':
        """逐点乘积（只用于等值线路线，不带 Laplace 密度）"""
        return TestField(value=lambda z: self(z) * np.asarray(other(z), dtype=float),
                         lap_density=_NOT_AVAILABLE, name=name or f"{self.name}*g")

    def check_harmonic(self, tol: float = 1e-6, circles: int = 16, samples: int = 256) -> bool:
        """在若干小圆上检查均值性质"""
        rng = np.random.default_rng(0)
        theta = TWO_PI * np.arange(samples) / samples
        for _ in range(circles):
            center = 0.5 * rng.uniform(-1, 1) + 0.5j * rng.uniform(-1, 1)
            radius = 0.2
            mean = float(np.mean(self(center + radius * np.exp(1j * theta))))
            value = float(self(np.array([center]))[0])
            if not abs(mean - value) <= tol * max(1.0, abs(value)):
                return False
        return True


def _not_available(z):
    raise DomainError("该测试函数没有 Laplace 密度，只能走等值线路线")


_NOT_AVAILABLE = _not_available


@dataclass(frozen=True)
class LevelPairing:
    """μ_{u,r}(φ) 的值与来源"""
    r: float
    value: float
    route: str
    report: QuadratureReport

    @property
    def est_error(self) -> float:
        return self.report.est_error

    @property
    def converged(self) -> bool:
        return self.report.converged


def _check_r(r: float) -> float:
    r = float(r)
    if not r < 0:
        raise DomainError(f"r 必须为负: {r}")
    return r


def mu_pair_lj(u: Exhaustion, r: float, phi: TestField, tol: Optional[float] = None) -> LevelPairing:
    """
    μ_{u,r}(φ) = Σ_{a_j∈B} c_j φ(a_j) + c_q/π ∫_B φ dA + ∫_B (r - u) Δφ dA

    调和 φ 配合纯原子 u 时没有面积分，结果精确
    """
    r = _check_r(r)
    if phi.lap_density is _NOT_AVAILABLE:
        raise DomainError(f"测试函数 {phi.name} 没有 Laplace 密度")
    for a in u.poles:
        if any(abs(a - s) < 1e-14 for s in phi.singular_points):
            raise DomainError(f"u 的极点 {a} 与 φ 的奇点重合")

    atomic = math.fsum(c * float(phi(np.array([a]))[0]) for a, c in u.atoms)
    if phi.harmonic and u.is_atomic:
        return LevelPairing(r, atomic, ROUTE_LJ, QuadratureReport.exact(atomic))

    q = u.quad_weight
    lap = phi.lap_density

    def density(z):
        total = np.zeros(np.shape(z))
        if q:
            total = total + (q / math.pi) * phi(z)
        if lap is not None:
            with np.errstate(all='ignore'):
                total = total + (r - u.field(z)) * np.asarray(lap(z), dtype=float)
        return total

    singular = tuple(phi.singular_points) + (u.poles if lap is not None else ())
    area = disk_integrate(density, region=u.sublevel(r), singular_points=singular, tol=tol)
    value = atomic + area.value
    report = QuadratureReport(value, area.est_error, area.nodes, area.converged, area.tol)
    logger.debug(f"LJ μ_{{u,r}}(φ): u={u.label}, r={r:.6g}, φ={phi.name}, value={value:.12g}")
    return LevelPairing(r, value, ROUTE_LJ, report)


def regular_contours(u: Exhaustion, r: float, grid_n: Optional[int] = None):
    """提取等值线；r 不是正则值时按配置的步长向更负的方向微调，保证微调后仍有 r < 0"""
    cfg = get_active_config().contour
    attempt = r
    last: Optional[DegenerateLevelError] = None
    for k in range(cfg.max_nudges + 1):
        try:
            contours = trace_levelset(u.field, attempt, grid_n=grid_n, gradient=u.gradient, seeds=u.poles)
            if k:
                logger.warning(f"r={r:.12g} 退化，微调为 {attempt:.12g}")
            return contours, attempt
        except DegenerateLevelError as e:
            last = e
            attempt = r - (k + 1) * cfg.nudge
    raise last


def mu_pair_contour(u: Exhaustion, r: float, phi: Callable, grid_n: Optional[int] = None,
                    tol: Optional[float] = None, rule: Optional[str] = None) -> LevelPairing:
    """μ_{u,r}(φ) = Σ_C ∫_C φ |∇u|/2π ds，误差估计取与隔点抽取折线之差"""
    r = _check_r(r)
    cfg = get_active_config().contour
    tol = cfg.tol if tol is None else float(tol)
    rule = rule or cfg.rule
    contours, r_used = regular_contours(u, r, grid_n)

    def density(z):
        return np.asarray(phi(z), dtype=float) * np.abs(u.gradient(z)) / TWO_PI

    def level(z):
        return u.field(z) - r_used

    def integrate(contour):
        if rule == "curved":
            return contour_integrate_curved(contour, density, level)
        return contour_integrate(contour, density)

    fine = math.fsum(integrate(c) for c in contours)
    coarse = math.fsum(integrate(c.coarsened()) for c in contours)
    est = abs(fine - coarse)
    nodes = sum(len(c) for c in contours)
    tol_eff = effective_tolerance(tol, fine)
    report = QuadratureReport(fine, est, nodes, est <= tol_eff, tol_eff)
    logger.debug(f"等值线 μ_{{u,r}}(φ): r={r_used:.6g}, {len(contours)} 个分量, value={fine:.12g}, err={est:.3g}")
    return LevelPairing(r_used, fine, ROUTE_CONTOUR, report)


def mu_mass(u: Exhaustion, r: float, tol: Optional[float] = None) -> float:
    """μ_{u,r}(1) = Σ c_j + c_q·|B|/π"""
    pairing = mu_pair_lj(u, r, TestField.constant(1.0), tol=tol)
    if not pairing.converged:
        raise QuadratureBudgetError(f"μ 质量未收敛: r={r}", report=pairing.report)
    return pairing.value


def check_subharmonic_nonnegative(phi: TestField, samples: int = 64) -> None:
    """在圆盘内网格上抽样检查 φ ≥ 0 且 Δφ ≥ 0"""
    xs = np.linspace(-0.99, 0.99, samples)
    Z = (xs[None, :] + 1j * xs[:, None]).ravel()
    Z = Z[np.abs(Z) < 0.99]
    Z = Z[[all(abs(z - s) > 1e-6 for s in phi.singular_points) for z in Z]]
    values = phi(Z)
    if np.any(values < 0):
        raise PreconditionError(f"测试函数 {phi.name} 在抽样点上取负值")
    if phi.lap_density is _NOT_AVAILABLE:
        raise PreconditionError(f"测试函数 {phi.name} 没有 Laplace 密度")
    if phi.lap_density is not None:
        with np.errstate(all='ignore'):
            lap = np.asarray(phi.lap_density(Z), dtype=float)
        if np.any(lap[np.isfinite(lap)] < 0):
            raise PreconditionError(f"测试函数 {phi.name} 不是次调和的")


def monotonicity_table(u: Exhaustion, phi: TestField, r_seq: Sequence[float],
                       tol: Optional[float] = None, max_workers: Optional[int] = None) -> ConvergenceTable:
    """r ↦ μ_{u,r}(φ) 的表，参考列为边界配对 μ_u(φ|𝕋)"""
    check_subharmonic_nonnegative(phi)
    r_values = [_check_r(r) for r in r_seq]
    workers = max_workers or get_active_config().experiment.max_workers

    reference = None
    if phi.continuous_on_closure:
        ref_report = boundary_pair_report(u, phi.boundary)
        reference = ref_report.value

    with ThreadPoolExecutor(max_workers=workers) as executor:
        pairings = list(executor.map(lambda r: mu_pair_lj(u, r, phi, tol=tol), r_values))

    table = ConvergenceTable(experiment="monotone",
                             metadata={"u": u.label, "phi": phi.name})
    table.declare("mu", "nondecreasing")
    for pairing in pairings:
        table.add("mu", pairing.r, pairing.value, reference=reference,
                  converged=pairing.converged, est_error=pairing.est_error)
        logger.info(f"monotone r={pairing.r:.6g}: μ={pairing.value:.12g}")
    return table
