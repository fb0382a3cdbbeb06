# -*- coding: utf-8 -*-
"""
积分引擎
- 单位圆上的周期积分：节点倍增梯形公式；声明奇异角后按弧段交给 QUADPACK 做分级细分
- 圆盘子区域上的面积分：自适应四叉树，被区域边界切割的单元逐条 Gauss 线求根后积分
- 等值线：marching squares 提取 + 网格边上的一维求根修正，以及线积分
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import contourpy
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from ..config.solver_config import get_active_config
from .errors import DomainError, DegenerateLevelError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# 区间二分次数：长度 <= 2 的区间二分 60 次后小于机器精度
_BISECTION_STEPS = 60


def effective_tolerance(tol: float, value: float) -> float:
    """|value| <= 1 时为绝对容差，超过后按相对容差放大"""
    return tol * max(1.0, abs(value))


@dataclass(frozen=True)
class QuadratureReport:
    """一次积分的结果与误差估计"""
    value: float
    est_error: float
    nodes: int
    converged: bool
    tol: float

    @property
    def cells_or_nodes(self) -> int:
        return self.nodes

    @classmethod
    def exact(cls, value: float) -> 'QuadratureReport':
        """闭式求值，无积分误差"""
        return cls(value=float(value), est_error=0.0, nodes=0, converged=True, tol=0.0)

    @classmethod
    def combine(cls, reports: Sequence['QuadratureReport'], value: Optional[float] = None) -> 'QuadratureReport':
        """合并若干积分：误差与容差相加，全部收敛才算收敛"""
        reports = list(reports)
        total = math.fsum(r.value for r in reports) if value is None else float(value)
        return cls(
            value=total,
            est_error=math.fsum(r.est_error for r in reports),
            nodes=sum(r.nodes for r in reports),
            converged=all(r.converged for r in reports),
            tol=math.fsum(r.tol for r in reports),
        )

    def scaled(self, factor: float, shift: float = 0.0) -> 'QuadratureReport':
        """value -> factor*value + shift"""
        return QuadratureReport(
            value=factor * self.value + shift,
            est_error=abs(factor) * self.est_error,
            nodes=self.nodes,
            converged=self.converged,
            tol=abs(factor) * self.tol,
        )


# ---------------- 周期积分 -----------------

def canonical_angles(angles: Iterable[float]) -> List[float]:
    """角度归约到 [0, 2π) 并去重排序"""
    reduced = sorted({float(a) % TWO_PI for a in angles})
    merged: List[float] = []
    for a in reduced:
        if not merged or a - merged[-1] > 1e-13:
            merged.append(a)
    if len(merged) > 1 and merged[0] + TWO_PI - merged[-1] <= 1e-13:
        merged.pop()
    return merged


def _sample_periodic(g: Callable, theta: np.ndarray) -> np.ndarray:
    with np.errstate(all='ignore'):
        values = np.asarray(g(theta))
    if np.iscomplexobj(values):
        raise DomainError("周期积分的被积函数必须是实值")
    values = np.broadcast_to(values.astype(float), theta.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        raise DomainError(
            f"被积函数在 θ={float(theta[bad][0]):.17g} 处非有限，需要把该角声明为奇异角"
        )
    return values


def _trapezoid_periodic(g: Callable, tol: float, max_nodes: int) -> QuadratureReport:
    n = 64
    total = math.fsum(_sample_periodic(g, TWO_PI * np.arange(n) / n))
    estimate = total / n
    diff = math.inf
    while 2 * n <= max_nodes:
        odd = TWO_PI * (np.arange(n) + 0.5) / n
        total += math.fsum(_sample_periodic(g, odd))
        n *= 2
        refined = total / n
        diff = abs(refined - estimate)
        estimate = refined
        if diff <= effective_tolerance(tol, refined):
            logger.debug(f"梯形公式收敛: n={n}, value={refined:.12g}, diff={diff:.3g}")
            return QuadratureReport(refined, diff, n, True, effective_tolerance(tol, refined))

    logger.warning(f"梯形公式在 {n} 个节点内未收敛，差值 {diff:.3g}")
    return QuadratureReport(estimate, diff, n, False, effective_tolerance(tol, estimate))


def _graded_periodic(g: Callable, tol: float, angles: List[float], limit: int) -> QuadratureReport:
    bounds = list(angles) + [angles[0] + TWO_PI]
    arc_tol = 0.5 * tol * TWO_PI / len(angles)

    def scalar(theta: float) -> float:
        with np.errstate(all='ignore'):
            return float(np.real(g(np.asarray(theta % TWO_PI))))

    pieces, errors = [], []
    nevals = 0
    ok = True
    for a, b in zip(bounds[:-1], bounds[1:]):
        result = integrate.quad(scalar, a, b, epsabs=arc_tol, epsrel=0.5 * tol, limit=limit, full_output=1)
        value, abserr, info = result[0], result[1], result[2]
        if len(result) > 3:
            ok = False
            logger.warning(f"QUADPACK 在弧段 [{a:.6g}, {b:.6g}] 上未达到精度: {result[3]}")
        pieces.append(value)
        errors.append(abserr)
        nevals += int(info.get('neval', 0))

    value = math.fsum(pieces) / TWO_PI
    est_error = math.fsum(errors) / TWO_PI
    scale = math.fsum(abs(p) for p in pieces) / TWO_PI
    tol_eff = effective_tolerance(tol, scale)
    converged = ok and math.isfinite(value) and est_error <= tol_eff
    return QuadratureReport(value, est_error, nevals, converged, tol_eff)


def periodic_integrate(g: Callable, tol: Optional[float] = None,
                       singular_angles: Iterable[float] = (),
                       max_nodes: Optional[int] = None) -> QuadratureReport:
    """
    计算 ∫ g dλ（λ 为归一化弧长，总质量 1）

    Args:
        g: 向量化的角度函数
        tol: 容差，默认取当前配置
        singular_angles: 需要分级细分的角（可积奇点、尖峰中心）
        max_nodes: 梯形公式节点上限

    Returns:
        QuadratureReport，预算耗尽时 converged=False 并给出最佳估计
    """
    cfg = get_active_config().quadrature
    tol = cfg.periodic_tol if tol is None else float(tol)
    if tol <= 0:
        raise DomainError(f"容差必须为正: {tol}")
    angles = canonical_angles(singular_angles)
    if angles:
        return _graded_periodic(g, tol, angles, cfg.quad_limit)
    return _trapezoid_periodic(g, tol, max_nodes or cfg.max_nodes)


# ---------------- 面积分 -----------------

def _bisect_crossing(fn: Callable, za: np.ndarray, zb: np.ndarray, a_below: np.ndarray,
                     steps: int = _BISECTION_STEPS) -> np.ndarray:
    """在线段 za→zb 上二分 fn 的符号变化点，a_below 表示 fn(za) < 0"""
    lo = np.zeros(za.shape)
    hi = np.ones(za.shape)
    span = zb - za
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        with np.errstate(all='ignore'):
            below = np.asarray(fn(za + mid * span), dtype=float) < 0
        same = below == a_below
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return za + 0.5 * (lo + hi) * span


@dataclass(frozen=True)
class Region:
    """圆盘内的子区域 {level < 0} ∩ 𝔻；anchors 是已知位于区域内、需要强制解析的点"""
    level: Callable[[np.ndarray], np.ndarray]
    anchors: Tuple[complex, ...] = ()
    name: str = "region"

    def effective_level(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(all='ignore'):
            own = np.asarray(self.level(z), dtype=float)
            own = np.where(np.isnan(own), np.inf, own)
            return np.maximum(own, np.abs(z) ** 2 - 1.0)

    def __call__(self, z) -> np.ndarray:
        return self.effective_level(z) < 0

    @classmethod
    def unit_disk(cls) -> 'Region':
        return cls(level=lambda z: np.abs(z) ** 2 - 1.0, name="disk")

    @classmethod
    def sublevel(cls, field: Callable, r: float, anchors: Iterable[complex] = ()) -> 'Region':
        """{field < r}"""
        return cls(level=lambda z: field(z) - r, anchors=tuple(complex(a) for a in anchors),
                   name=f"sublevel(r={r:.6g})")

    @classmethod
    def superlevel(cls, field: Callable, r: float) -> 'Region':
        """{field > r} ∩ 𝔻"""
        return cls(level=lambda z: r - field(z), name=f"superlevel(r={r:.6g})")


class _CellIntegrator:
    """批量计算正方形单元上的积分"""

    def __init__(self, density: Callable, region: Region, order: int, samples: int,
                 singular: np.ndarray, radius: float):
        self.density = density
        self.region = region
        self.singular = singular
        self.radius = radius
        nodes, weights = leggauss(order)
        self.xi = 0.5 * (nodes + 1.0)
        self.wi = 0.5 * weights
        self.t = np.linspace(0.0, 1.0, samples)

    def _eval_density(self, z: np.ndarray, tolerate: np.ndarray) -> np.ndarray:
        with np.errstate(all='ignore'):
            values = np.broadcast_to(np.asarray(self.density(z), dtype=float), z.shape).copy()
        if self.singular.size and np.any(tolerate):
            # 声明奇点的 ε 圆盘内的节点不计入，该圆盘的贡献由 _excluded_disk_bound 估计
            near = z[tolerate]
            close = np.min(np.abs(near[:, None] - self.singular[None, :]), axis=1) < self.radius
            excluded = np.zeros(z.shape, dtype=bool)
            excluded[tolerate] = close
            values[excluded] = 0.0
        bad = ~np.isfinite(values)
        if bad.any():
            where = z[bad][0]
            raise DomainError(f"密度在 z={where:.12g} 处非有限，且不在任何声明奇点的 ε 圆盘内")
        return values

    def __call__(self, x0: np.ndarray, y0: np.ndarray, h: np.ndarray,
                 force_cut: np.ndarray, near_singular: np.ndarray) -> np.ndarray:
        t = self.t
        sx = x0[:, None, None] + h[:, None, None] * t[None, :, None]
        sy = y0[:, None, None] + h[:, None, None] * t[None, None, :]
        lv = self.region.effective_level(sx + 1j * sy)
        inside = np.all(lv < 0, axis=(1, 2)) & ~force_cut
        outside = np.all(lv >= 0, axis=(1, 2)) & ~force_cut
        cut = ~inside & ~outside

        values = np.zeros(x0.shape)
        if inside.any():
            values[inside] = self._tensor(x0[inside], y0[inside], h[inside], near_singular[inside])
        if cut.any():
            values[cut] = self._lines(x0[cut], y0[cut], h[cut], near_singular[cut])
        return values

    def _tensor(self, x0, y0, h, near):
        xi, wi = self.xi, self.wi
        X = x0[:, None, None] + h[:, None, None] * xi[None, :, None]
        Y = y0[:, None, None] + h[:, None, None] * xi[None, None, :]
        F = self._eval_density(X + 1j * Y, np.broadcast_to(near[:, None, None], X.shape))
        return h ** 2 * np.einsum('i,j,mij->m', wi, wi, F)

    def _lines(self, x0, y0, h, near):
        xi, wi, t = self.xi, self.wi, self.t
        M, n, S = len(x0), len(xi), len(t)
        X = x0[:, None] + h[:, None] * xi[None, :]
        Ys = np.broadcast_to(y0[:, None, None] + h[:, None, None] * t[None, None, :], (M, n, S))
        Xs = np.broadcast_to(X[:, :, None], (M, n, S))
        L = self.region.effective_level(Xs + 1j * Ys)

        ya, yb = Ys[..., :-1], Ys[..., 1:]
        ina, inb = L[..., :-1] < 0, L[..., 1:] < 0
        xa = Xs[..., :-1]

        roots = ya.copy()
        mixed = ina != inb
        if mixed.any():
            crossing = _bisect_crossing(
                self.region.effective_level,
                xa[mixed] + 1j * ya[mixed],
                xa[mixed] + 1j * yb[mixed],
                ina[mixed],
            )
            roots[mixed] = crossing.imag

        lower = np.where(ina, ya, np.where(inb, roots, ya))
        upper = np.where(ina, np.where(inb, yb, roots), np.where(inb, yb, ya))
        length = upper - lower
        active = length > 0

        contrib = np.zeros(length.shape)
        if active.any():
            Yg = lower[active][:, None] + length[active][:, None] * xi[None, :]
            Z = xa[active][:, None] + 1j * Yg
            near_b = np.broadcast_to(near[:, None, None], length.shape)[active]
            F = self._eval_density(Z, np.broadcast_to(near_b[:, None], Z.shape))
            contrib[active] = (F @ wi) * length[active]

        line_sums = contrib.sum(axis=2)
        return h * (line_sums @ wi)


def _cell_geometry(keys: Sequence[Tuple[int, int, int]]):
    depth = np.array([k[0] for k in keys], dtype=float)
    h = 2.0 / 2.0 ** depth
    x0 = -1.0 + np.array([k[1] for k in keys], dtype=float) * h
    y0 = -1.0 + np.array([k[2] for k in keys], dtype=float) * h
    return x0, y0, h


def _touches(x0, y0, h, points: np.ndarray) -> np.ndarray:
    if points.size == 0:
        return np.zeros(x0.shape, dtype=bool)
    pad = 1e-12 * h[:, None]
    px, py = points.real[None, :], points.imag[None, :]
    hit = ((px >= x0[:, None] - pad) & (px <= x0[:, None] + h[:, None] + pad)
           & (py >= y0[:, None] - pad) & (py <= y0[:, None] + h[:, None] + pad))
    return hit.any(axis=1)


def _children(key: Tuple[int, int, int]) -> List[Tuple[int, int, int]]:
    d, i, j = key
    return [(d + 1, 2 * i, 2 * j), (d + 1, 2 * i + 1, 2 * j),
            (d + 1, 2 * i, 2 * j + 1), (d + 1, 2 * i + 1, 2 * j + 1)]


@dataclass
class _Leaf:
    coarse: float
    fine: float
    err: float
    child_values: Tuple[float, float, float, float]
    forced: bool


def _excluded_disk_bound(density: Callable, region: Region, points: np.ndarray, radius: float,
                         samples: int = 32) -> float:
    """
    声明奇点周围半径 ε 的小圆盘贡献的上界

    在半径 ε 与 ε/2 的圆上取 |F| 的均值，按 |F| ≈ C|z-a|^β 拟合 β，
    再用 ∫_{|z-a|<ε} C|z-a|^β dA = 2π C ε^{β+2}/(β+2)。β <= -2 时不可积，返回 inf。
    """
    ring = np.exp(1j * TWO_PI * np.arange(samples) / samples)
    total = 0.0
    for a in points:
        outer = a + radius * ring
        if not (np.any(region(outer)) or bool(region(np.array([a]))[0])):
            continue
        with np.errstate(all='ignore'):
            m_outer = float(np.mean(np.abs(np.broadcast_to(np.asarray(density(outer), dtype=float), outer.shape))))
            inner = a + 0.5 * radius * ring
            m_inner = float(np.mean(np.abs(np.broadcast_to(np.asarray(density(inner), dtype=float), inner.shape))))
        if not (math.isfinite(m_outer) and math.isfinite(m_inner)):
            return math.inf
        if m_outer == 0.0:
            continue
        beta = math.log2(m_outer / m_inner) if m_inner > 0 else 0.0
        if beta + 2.0 <= 1e-3:
            return math.inf
        total += TWO_PI * m_outer * radius ** 2 / (beta + 2.0)
    return total


def disk_integrate(density: Callable, region: Optional[Region] = None,
                   singular_points: Iterable[complex] = (), tol: Optional[float] = None,
                   max_cells: Optional[int] = None) -> QuadratureReport:
    """
    计算 ∫∫_{region} density dA（平面面积测度）

    四叉树单元的值取四个子单元之和，误差估计取与单元自身 Gauss 值之差；
    每轮细分误差最大、累计占总误差一半的叶子。含奇点或锚点的单元先强制细分到 anchor_depth。
    声明奇点周围半径 singular_radius 的小圆盘不参与求积，其贡献上界加到 est_error。
    """
    cfg = get_active_config().quadrature
    region = region or Region.unit_disk()
    tol = cfg.area_tol if tol is None else float(tol)
    if tol <= 0:
        raise DomainError(f"容差必须为正: {tol}")
    budget = max_cells or cfg.max_cells

    singular = np.array([complex(p) for p in singular_points], dtype=complex)
    anchors = np.array(list(region.anchors), dtype=complex)
    forced_points = np.concatenate([singular, anchors])
    anchor_inside = anchors[region(anchors)] if anchors.size else anchors
    integrator = _CellIntegrator(density, region, cfg.gauss_order, cfg.line_samples,
                                 singular, cfg.singular_radius)
    excluded = _excluded_disk_bound(density, region, singular, cfg.singular_radius)

    def evaluate(keys: List[Tuple[int, int, int]]) -> np.ndarray:
        if not keys:
            return np.zeros(0)
        x0, y0, h = _cell_geometry(keys)
        return integrator(x0, y0, h, _touches(x0, y0, h, anchor_inside), _touches(x0, y0, h, singular))

    d0 = cfg.base_depth
    n0 = 2 ** d0
    h0 = 2.0 / n0
    initial = []
    for i in range(n0):
        for j in range(n0):
            x0, y0 = -1.0 + i * h0, -1.0 + j * h0
            cx = min(max(0.0, x0), x0 + h0)
            cy = min(max(0.0, y0), y0 + h0)
            if cx * cx + cy * cy < 1.0:
                initial.append((d0, i, j))

    leaves: Dict[Tuple[int, int, int], _Leaf] = {}
    evaluated = 0

    def expand(batch: List[Tuple[Tuple[int, int, int], float]]) -> None:
        nonlocal evaluated
        child_keys = [c for key, _ in batch for c in _children(key)]
        values = evaluate(child_keys)
        evaluated += len(child_keys)
        x0, y0, h = _cell_geometry([key for key, _ in batch])
        touching = _touches(x0, y0, h, forced_points)
        for idx, (key, coarse) in enumerate(batch):
            kids = tuple(float(v) for v in values[4 * idx:4 * idx + 4])
            fine = math.fsum(kids)
            forced = bool(touching[idx]) and key[0] < cfg.anchor_depth
            leaves[key] = _Leaf(coarse, fine, abs(coarse - fine), kids, forced)

    coarse_values = evaluate(initial)
    evaluated += len(initial)
    expand(list(zip(initial, (float(v) for v in coarse_values))))

    converged = False
    while True:
        value = math.fsum(leaves[k].fine for k in sorted(leaves))
        any_forced = any(leaf.forced for leaf in leaves.values())
        total_err = math.fsum(leaf.err for leaf in leaves.values())
        tol_eff = effective_tolerance(tol, value)
        if not any_forced and total_err + excluded <= tol_eff:
            converged = True
            break
        if not any_forced and excluded > tol_eff:
            logger.warning(f"奇点 ε 圆盘的贡献上界 {excluded:.3g} 超过容差 {tol_eff:.3g}")
            break
        if evaluated >= budget:
            logger.warning(f"面积分预算耗尽: {evaluated} 个单元, 误差估计 {total_err:.3g} > {tol_eff:.3g}")
            break

        refinable = [(k, leaf) for k, leaf in leaves.items() if k[0] < cfg.max_depth]
        if not refinable:
            logger.warning(f"面积分达到最大深度 {cfg.max_depth}, 误差估计 {total_err:.3g}")
            break
        forced = sorted(k for k, leaf in refinable if leaf.forced)
        if forced:
            chosen = forced
        else:
            ranked = sorted(refinable, key=lambda item: (-item[1].err, item[0]))
            chosen, cumulative = [], 0.0
            for k, leaf in ranked:
                chosen.append(k)
                cumulative += leaf.err
                if cumulative >= 0.5 * total_err:
                    break

        batch = []
        for key in chosen:
            leaf = leaves.pop(key)
            batch.extend(zip(_children(key), leaf.child_values))
        expand(batch)

    est_error = math.fsum(leaf.err for leaf in leaves.values()) + excluded
    logger.debug(f"面积分 [{region.name}]: value={value:.12g}, err={est_error:.3g}, cells={evaluated}")
    return QuadratureReport(value, est_error, evaluated, converged, effective_tolerance(tol, value))


# ---------------- 等值线 -----------------

class PolylineContour:
    """S_{u,r} 的折线离散；闭合曲线不重复首点"""

    def __init__(self, vertices, closed: bool):
        vertices = np.asarray(vertices, dtype=complex).ravel()
        if vertices.size < 2:
            raise DomainError("折线至少需要两个顶点")
        steps = np.abs(np.diff(vertices))
        if closed:
            steps = np.append(steps, abs(vertices[0] - vertices[-1]))
        if np.any(steps == 0):
            raise DomainError("折线相邻顶点必须不同")
        if closed and vertices.size < 8:
            raise DomainError(f"闭合折线至少需要 8 个顶点，实际 {vertices.size}")
        if np.any(np.abs(vertices) >= 1.0):
            raise DomainError("折线顶点必须位于单位圆盘内")
        self.vertices = vertices
        self.closed = bool(closed)

    def __len__(self) -> int:
        return self.vertices.size

    def __repr__(self) -> str:
        return f"PolylineContour(n={self.vertices.size}, closed={self.closed})"

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1)
        return v[:-1], v[1:]

    @property
    def length(self) -> float:
        starts, ends = self.segments()
        return math.fsum(np.abs(ends - starts))

    def coarsened(self) -> 'PolylineContour':
        """隔点抽取，用于误差估计"""
        kept = self.vertices[::2]
        if not self.closed and kept[-1] != self.vertices[-1]:
            kept = np.append(kept, self.vertices[-1])
        if self.closed and kept.size < 8:
            return self
        return PolylineContour(kept, self.closed)

    def encloses(self, point: complex) -> bool:
        """环绕数判断"""
        if not self.closed:
            return False
        starts, ends = self.segments()
        with np.errstate(all='ignore'):
            turning = np.angle((ends - point) / (starts - point)).sum()
        return abs(turning) > math.pi


def _dedupe(points: np.ndarray, closed: bool) -> np.ndarray:
    keep = np.ones(points.size, dtype=bool)
    keep[1:] = np.abs(np.diff(points)) > 1e-15
    points = points[keep]
    if closed and points.size > 1 and abs(points[0] - points[-1]) <= 1e-15:
        points = points[:-1]
    return points


def _polish_on_edges(shifted: Callable, pts: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """把 marching squares 的线性插值顶点修正到所在网格边上的真实零点"""
    n = xs.size - 1
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    fx = (pts.real - xs[0]) / dx
    fy = (pts.imag - ys[0]) / dy
    vertical = np.abs(fx - np.round(fx)) < 1e-7

    iv = np.clip(np.round(fx), 0, n).astype(int)
    jv = np.clip(np.floor(fy), 0, n - 1).astype(int)
    ih = np.clip(np.floor(fx), 0, n - 1).astype(int)
    jh = np.clip(np.round(fy), 0, n).astype(int)

    za = np.where(vertical, xs[iv] + 1j * ys[jv], xs[ih] + 1j * ys[jh])
    zb = np.where(vertical, xs[iv] + 1j * ys[jv + 1], xs[ih + 1] + 1j * ys[jh])
    with np.errstate(all='ignore'):
        fa = np.asarray(shifted(za), dtype=float) < 0
        fb = np.asarray(shifted(zb), dtype=float) < 0
    bracket = fa != fb
    polished = pts.copy()
    if bracket.any():
        polished[bracket] = _bisect_crossing(shifted, za[bracket], zb[bracket], fa[bracket])
    return polished


def _trace_window(field: Callable, r: float, n: int, window: Tuple[float, float, float, float]):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    Z = xs[None, :] + 1j * ys[:, None]
    with np.errstate(all='ignore'):
        U = np.asarray(field(Z), dtype=float) - r
    U = np.nan_to_num(U, nan=1.0, posinf=1.0, neginf=-1.0)

    def shifted(z):
        return np.asarray(field(z), dtype=float) - r

    generator = contourpy.contour_generator(x=xs, y=ys, z=U, line_type=contourpy.LineType.Separate)
    traced = []
    for line in generator.lines(0.0):
        pts = line[:, 0] + 1j * line[:, 1]
        closed = pts.size > 2 and pts[0] == pts[-1]
        if closed:
            pts = pts[:-1]
        pts = _dedupe(_polish_on_edges(shifted, pts, xs, ys), closed)
        traced.append((pts, closed))
    cell = max((x1 - x0), (y1 - y0)) / n
    return traced, cell


def _critical_ratio(gradient: Callable, pts: np.ndarray, step: float) -> np.ndarray:
    """|∇u| / ‖Hess u‖，即到最近临界点距离的一阶估计"""
    g0 = np.asarray(gradient(pts), dtype=complex)
    cx = (np.asarray(gradient(pts + step), dtype=complex) - np.asarray(gradient(pts - step), dtype=complex)) / (2 * step)
    cy = (np.asarray(gradient(pts + 1j * step), dtype=complex) - np.asarray(gradient(pts - 1j * step), dtype=complex)) / (2 * step)
    hess = np.stack([np.stack([cx.real, cy.real], axis=-1), np.stack([cx.imag, cy.imag], axis=-1)], axis=-2)
    norm = np.linalg.norm(hess, ord=2, axis=(-2, -1))
    with np.errstate(all='ignore'):
        return np.where(norm > 0, np.abs(g0) / norm, np.inf)


def _finite_gradient(field: Callable, step: float = 1e-7) -> Callable:
    def gradient(z):
        z = np.asarray(z, dtype=complex)
        gx = (np.asarray(field(z + step)) - np.asarray(field(z - step))) / (2 * step)
        gy = (np.asarray(field(z + 1j * step)) - np.asarray(field(z - 1j * step))) / (2 * step)
        return gx + 1j * gy
    return gradient


def trace_levelset(field: Callable, r: float, grid_n: Optional[int] = None,
                   gradient: Optional[Callable] = None,
                   seeds: Iterable[complex] = ()) -> List[PolylineContour]:
    """
    提取 {field = r} 与 [-1,1]^2 网格相交的全部分量

    Args:
        field: 向量化标量场（复数坐标）
        r: 等值
        grid_n: 每边网格数
        gradient: 复数形式梯度 ∂x + i∂y，缺省时用中心差分
        seeds: 已知位于 {field < r} 内的点（极点）；未被任何分量包围时在其附近局部重采样

    Raises:
        DegenerateLevelError: 等值线经过临界点附近
    """
    cfg = get_active_config().contour
    grid_n = int(grid_n or cfg.grid_n)
    gradient = gradient or _finite_gradient(field)

    pending = [((-1.0, 1.0, -1.0, 1.0), 0)]
    pieces: List[Tuple[np.ndarray, bool, float]] = []
    main_cell = 2.0 / grid_n
    while pending:
        window, depth = pending.pop(0)
        traced, cell = _trace_window(field, r, grid_n, window)
        for pts, closed in traced:
            if closed and pts.size < 8 and depth < 3:
                center = 0.5 * (pts.real.min() + pts.real.max()) + 0.5j * (pts.imag.min() + pts.imag.max())
                half = max(4 * cell, float(np.ptp(pts.real)), float(np.ptp(pts.imag)))
                pending.append(((center.real - half, center.real + half, center.imag - half, center.imag + half), depth + 1))
                continue
            if depth > 0 and not closed:
                continue
            pieces.append((pts, closed, cell))

    contours = [PolylineContour(pts, closed) for pts, closed, _ in pieces]
    seed_list = [complex(s) for s in seeds]
    for seed in seed_list:
        with np.errstate(all='ignore'):
            below = float(np.asarray(field(np.array([seed])))[0]) < r
        if not below or any(c.encloses(seed) for c in contours):
            continue
        half = 2 * main_cell
        window = (seed.real - half, seed.real + half, seed.imag - half, seed.imag + half)
        traced, cell = _trace_window(field, r, grid_n, window)
        for pts, closed in traced:
            if closed and pts.size >= 8:
                pieces.append((pts, closed, cell))
                contours.append(PolylineContour(pts, closed))
        logger.debug(f"极点 {seed:.6g} 附近局部重采样，找到 {len(traced)} 条曲线")

    for (pts, _, cell) in pieces:
        g = np.abs(np.asarray(gradient(pts), dtype=complex))
        min_gradient = float(g.min())
        ratio = float(_critical_ratio(gradient, pts, 0.5 * cell).min())
        if min_gradient < cfg.min_gradient or ratio < 2 * cell:
            raise DegenerateLevelError(
                f"r={r:.12g} 不是正则值: min|∇u|={min_gradient:.3g}, 到临界点距离估计 {ratio:.3g}",
                r=r, min_gradient=min_gradient,
            )

    logger.debug(f"等值线 r={r:.6g}: {len(contours)} 个分量, 顶点数 {[len(c) for c in contours]}")
    return contours


def contour_integrate(contour: PolylineContour, density: Callable) -> float:
    """逐段中点公式的弧长线积分"""
    starts, ends = contour.segments()
    mids = 0.5 * (starts + ends)
    with np.errstate(all='ignore'):
        values = np.broadcast_to(np.asarray(density(mids), dtype=float), mids.shape)
    if not np.all(np.isfinite(values)):
        raise DomainError("线积分密度在折线上出现 -inf/NaN")
    return math.fsum(values * np.abs(ends - starts))


def contour_integrate_curved(contour: PolylineContour, density: Callable, level: Callable) -> float:
    """
    逐段抛物线 Simpson 公式：弦中点沿法向投影到 {level = 0} 上，
    以两端点和投影点确定抛物线并取其弧长
    """
    starts, ends = contour.segments()
    chord = ends - starts
    c_len = np.abs(chord)
    mid = 0.5 * (starts + ends)
    normal = 1j * chord / c_len
    za = mid - 0.5 * c_len * normal
    zb = mid + 0.5 * c_len * normal
    with np.errstate(all='ignore'):
        la = np.asarray(level(za), dtype=float) < 0
        lb = np.asarray(level(zb), dtype=float) < 0
    ok = la != lb
    proj = mid.copy()
    if ok.any():
        proj[ok] = _bisect_crossing(level, za[ok], zb[ok], la[ok])

    sagitta = np.real((proj - mid) * np.conj(normal))
    k = 4.0 * sagitta / c_len
    with np.errstate(all='ignore'):
        shape = np.where(np.abs(k) > 1e-8, np.arcsinh(k) / k, 1.0 - k * k / 6.0)
    arc = 0.5 * c_len * (np.sqrt(1.0 + k * k) + shape)

    with np.errstate(all='ignore'):
        fs = np.broadcast_to(np.asarray(density(starts), dtype=float), starts.shape)
        fe = np.broadcast_to(np.asarray(density(ends), dtype=float), ends.shape)
        fm = np.broadcast_to(np.asarray(density(np.where(ok, proj, mid)), dtype=float), mid.shape)
    if not (np.all(np.isfinite(fs)) and np.all(np.isfinite(fe)) and np.all(np.isfinite(fm))):
        raise DomainError("线积分密度在折线上出现 -inf/NaN")

    simpson = arc / 6.0 * (fs + 4.0 * fm + fe)
    fallback = fm * c_len
    return math.fsum(np.where(ok, simpson, fallback))
