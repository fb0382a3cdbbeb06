# -*- coding: utf-8 -*-
"""
加权 Hardy 范数
- 三条路线：边界（|f*|^p 对 α_u dλ 积分）、Riesz（圆盘上的面积分）、等值线族（μ_{u,r}(|f|^p) 的单调表）
- 成员判定、伸缩与多项式逼近、典范球、弱*收敛、范数比较等实验
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.solver_config import get_active_config
from .analytic import AnalyticFunction, HarmonicFunction, HardyExponent, as_exponent
from .errors import DomainError, PreconditionError, QuadratureBudgetError
from .exhaustion import Exhaustion, ExhaustionSeries, alpha, boundary_pair_report
from .kernels import as_disk, green_kernel, harmonic_extension_report
from .measures import TestField, mu_pair_contour, mu_pair_lj
from .quadrature import QuadratureReport, Region, disk_integrate
from .tables import ConvergenceTable

logger = logging.getLogger(__name__)

ROUTE_BOUNDARY = "boundary"
ROUTE_RIESZ = "riesz"
ROUTE_LEVELS = "levels"

# 成员判定：连续几次部分和比值 >= GROWTH_RATIO 判为发散
GROWTH_RATIO = 1.05
GROWTH_WINDOW = 3


@dataclass(frozen=True)
class NormResult:
    """‖f‖_{H^p_u}；power 为 p 次幂，report 描述 power 的积分"""
    p: float
    route: str
    value: float
    finite: bool
    report: QuadratureReport
    power: float = math.nan
    extrapolated: Optional[float] = None
    table: Optional[ConvergenceTable] = None

    @property
    def converged(self) -> bool:
        return self.report.converged

    @property
    def est_error(self) -> float:
        """value 的误差估计（由 power 的误差换算）"""
        if not self.finite or self.power <= 0:
            return self.report.est_error
        return self.value / (self.p * self.power) * self.report.est_error


def _root(power: float, p: float) -> float:
    return max(power, 0.0) ** (1.0 / p)


def _from_power(report: QuadratureReport, p: float, route: str) -> NormResult:
    finite = math.isfinite(report.value)
    value = _root(report.value, p) if finite else math.inf
    return NormResult(p=p, route=route, value=value, finite=finite, report=report, power=report.value)


def _divergent(p: float, route: str) -> NormResult:
    report = QuadratureReport(math.inf, math.inf, 0, False, 0.0)
    return NormResult(p=p, route=route, value=math.inf, finite=False, report=report, power=math.inf)


def boundary_norm_of_trace(trace_power: Callable, p: float, u: Exhaustion,
                           singular_angles: Iterable[float] = (), tol: Optional[float] = None) -> NormResult:
    """(∫ trace_power·α_u dλ)^{1/p}，trace_power 已是 |·|^p"""
    report = boundary_pair_report(u, trace_power, tol=tol, singular_angles=singular_angles)
    if not math.isfinite(report.value):
        return _divergent(p, ROUTE_BOUNDARY)
    return _from_power(report, p, ROUTE_BOUNDARY)


def norm_boundary(f: AnalyticFunction, p: float, u: Exhaustion, tol: Optional[float] = None) -> NormResult:
    """‖f‖_{H^p_u} = ‖f*‖_{L^p(α_u dλ)}；某个奇异角上 Σγ·p ≥ 1 时积分发散"""
    p = as_exponent(p)
    if not f.classical_member(p):
        logger.info(f"{f.label()} 的边界迹在 p={p:g} 下不可积")
        return _divergent(p, ROUTE_BOUNDARY)
    return boundary_norm_of_trace(lambda theta: f.trace_abs_power(p, theta), p, u,
                                  singular_angles=f.singular_angles(), tol=tol)


def harmonic_norm(f: AnalyticFunction, p: float, u: Exhaustion, tol: Optional[float] = None) -> NormResult:
    """‖Re f‖_{u,p} = ‖(Re f)*‖_{L^p_u}，p > 1"""
    p = HardyExponent(float(p)).require_harmonic().p
    h = HarmonicFunction(f)
    if not f.classical_member(p):
        return _divergent(p, ROUTE_BOUNDARY)
    return boundary_norm_of_trace(lambda theta: h.trace_abs_power(p, theta), p, u,
                                  singular_angles=h.singular_angles(), tol=tol)


def norm_riesz(f: AnalyticFunction, p: float, u: Exhaustion, tol: Optional[float] = None) -> NormResult:
    """‖f‖^p = Σ c_j|f(a_j)|^p + c_q/π ∫|f|^p dA - ∫ u Δ|f|^p dA"""
    p = as_exponent(p)
    if not f.regular_on_closed_disk:
        raise DomainError(f"{f.label()} 在边界上奇异，Riesz 路线发散，请用边界路线")

    constant = f.is_polynomial and f.degree == 0
    if constant:
        # Δ|c|^p = 0 且权重和为 1，范数就是 |c|
        c = abs(f.poly[0])
        return NormResult(p=p, route=ROUTE_RIESZ, value=c, finite=True,
                          report=QuadratureReport.exact(c ** p), power=c ** p)

    q = u.quad_weight
    atomic = math.fsum(c * float(f.abs_power(p, a)) for a, c in u.atoms)

    def density(z):
        total = np.zeros(np.shape(z))
        if q:
            total = total + (q / math.pi) * f.abs_power(p, z)
        with np.errstate(all='ignore'):
            return total - u.field(z) * f.lap_density(p, z)

    singular = tuple(f.zeros() if p < 2 else ()) + u.poles
    area = disk_integrate(density, region=Region.unit_disk(), singular_points=singular, tol=tol)
    report = QuadratureReport(atomic + area.value, area.est_error, area.nodes, area.converged, area.tol)
    return _from_power(report, p, ROUTE_RIESZ)


def _extrapolate(rows: Sequence[Tuple[float, float]]) -> Optional[float]:
    """最后两行按 r 线性外推到 r = 0"""
    if len(rows) < 2:
        return None
    (r0, v0), (r1, v1) = rows[-2], rows[-1]
    if r1 == r0:
        return v1
    return v1 + (v1 - v0) * r1 / (r0 - r1)


def norm_levels(f: AnalyticFunction, p: float, u: Exhaustion, r_seq: Optional[Sequence[float]] = None,
                tol: Optional[float] = None, max_workers: Optional[int] = None) -> NormResult:
    """行为 μ_{u,r_k}(|f|^p) 的单调表，value 取最后一行的 1/p 次方"""
    p = as_exponent(p)
    cfg = get_active_config().experiment
    if r_seq is None:
        r_seq = [-2.0 ** -k for k in cfg.r_exponents]
    r_seq = [float(r) for r in r_seq]
    if not r_seq:
        raise DomainError("r 序列不能为空")
    phi = TestField.from_analytic(f, p)

    with ThreadPoolExecutor(max_workers=max_workers or cfg.max_workers) as executor:
        pairings = list(executor.map(lambda r: mu_pair_lj(u, r, phi, tol=tol), r_seq))

    table = ConvergenceTable(experiment="levels", metadata={"f": f.label(), "p": p, "u": u.label})
    table.declare("levels", "nondecreasing")
    for pairing in pairings:
        table.add("levels", pairing.r, pairing.value, converged=pairing.converged, est_error=pairing.est_error)

    last = pairings[-1]
    extrapolated = _extrapolate([(pg.r, pg.value) for pg in pairings])
    return NormResult(
        p=p, route=ROUTE_LEVELS, value=_root(last.value, p), finite=True,
        report=last.report,
        power=last.value,
        extrapolated=None if extrapolated is None else _root(extrapolated, p),
        table=table,
    )


# ---------------- 成员判定 -----------------

@dataclass(frozen=True)
class MembershipResult:
    """status: member / non_member / inconclusive"""
    status: str
    norm: NormResult
    table: Optional[ConvergenceTable] = None

    @property
    def member(self) -> Optional[bool]:
        if self.status == "inconclusive":
            return None
        return self.status == "member"


def series_partial_sums(f: AnalyticFunction, p: float, series: ExhaustionSeries,
                        k_seq: Sequence[int], tol: Optional[float] = None) -> Tuple[List[float], List[bool]]:
    """S_K = Σ_{k≤K} c_k ∫|f*|^p P(a_k,·) dλ（未归一）"""
    k_max = max(k_seq)
    angles = f.singular_angles()
    terms, flags = [], []
    for k in range(1, k_max + 1):
        report = harmonic_extension_report(lambda theta: f.trace_abs_power(p, theta), series.pole(k),
                                           tol=tol, singular_angles=angles)
        terms.append(series.weight(k) * report.value)
        flags.append(report.converged)
    partial = [math.fsum(terms[:K]) for K in k_seq]
    converged = [all(flags[:K]) for K in k_seq]
    return partial, converged


def membership(f: AnalyticFunction, p: float, u: Union[Exhaustion, ExhaustionSeries],
               tol: Optional[float] = None, k_seq: Optional[Sequence[int]] = None) -> MembershipResult:
    """
    f ∈ H^p_u 的数值判定

    先检查经典判据 Σγ·p < 1；有限原子族 α 有界，判定与经典空间一致。
    级数族按截断阶 K 计算部分和：比值持续 >= 1.05 判为不属于，增量按几何比 <= 1/1.05 衰减判为属于，
    其余情况为 inconclusive
    """
    p = as_exponent(p)
    if not f.classical_member(p):
        return MembershipResult("non_member", _divergent(p, ROUTE_BOUNDARY))

    if isinstance(u, Exhaustion):
        result = norm_boundary(f, p, u, tol=tol)
        status = "member" if result.finite and result.converged else "inconclusive"
        if status == "inconclusive":
            logger.warning(f"{f.label()} 在 {u.label} 下的成员判定不确定")
        return MembershipResult(status, result)

    cfg = get_active_config()
    k_seq = sorted(k_seq or cfg.experiment.k_seq)
    tol = cfg.quadrature.periodic_tol if tol is None else tol
    partial, converged = series_partial_sums(f, p, u, k_seq, tol=tol)

    table = ConvergenceTable(experiment="strict-inclusion",
                             metadata={"f": f.label(), "p": p, "series": u.name})
    table.declare("partial", "nondecreasing")
    for K, S, ok in zip(k_seq, partial, converged):
        table.add("partial", K, S, converged=ok)
    ratios = [b / a for a, b in zip(partial, partial[1:])]
    for K, ratio, ok in zip(k_seq[1:], ratios, converged[1:]):
        table.add("ratio", K, ratio, converged=ok)

    increments = [b - a for a, b in zip(partial, partial[1:])]
    inc_ratios = [b / a for a, b in zip(increments, increments[1:]) if a > 0]
    tail = ratios[-GROWTH_WINDOW:]
    if len(tail) == GROWTH_WINDOW and all(ratio >= GROWTH_RATIO for ratio in tail):
        status = "non_member"
    elif len(inc_ratios) >= GROWTH_WINDOW and max(inc_ratios[-GROWTH_WINDOW:]) <= 1.0 / GROWTH_RATIO:
        status = "member"
        decay = max(inc_ratios[-GROWTH_WINDOW:])
        table.metadata["limit_estimate"] = partial[-1] + increments[-1] * decay / (1.0 - decay)
    else:
        status = "inconclusive"
        logger.warning(f"{f.label()} 在级数 {u.name} 下的成员判定不确定: 比值 {tail}")

    K = k_seq[-1]
    weight_total = math.fsum(u.weight(k) for k in range(1, K + 1))
    power = partial[-1] / weight_total
    norm = NormResult(p=p, route=ROUTE_BOUNDARY, value=_root(power, p), finite=status != "non_member",
                      report=QuadratureReport(power, 0.0, 0, all(converged), tol), power=power)
    table.metadata["status"] = status
    return MembershipResult(status, norm, table)


# ---------------- 实验 -----------------

def _require_member(f: AnalyticFunction, p: float, u: Exhaustion) -> NormResult:
    result = norm_boundary(f, p, u)
    if not result.finite:
        raise PreconditionError(f"{f.label()} 不属于 H^{p:g}_u ({u.label})")
    return result


def dilation_study(f: AnalyticFunction, p: float, u: Exhaustion, t_seq: Sequence[float],
                   tol: Optional[float] = None, max_workers: Optional[int] = None) -> ConvergenceTable:
    """‖f_t‖ → ‖f‖ 与 ‖f_t - f‖ → 0，两列均走边界路线"""
    p = as_exponent(p)
    full = _require_member(f, p, u)
    angles = f.singular_angles()

    def row(t):
        ft = f.dilate(t)
        norm_t = norm_boundary(ft, p, u, tol=tol)

        def diff_power(theta):
            with np.errstate(all='ignore'):
                return np.abs(ft.values(np.exp(1j * theta)) - f.trace(theta)) ** p

        diff = boundary_norm_of_trace(diff_power, p, u, singular_angles=angles, tol=tol)
        return t, norm_t, diff

    workers = max_workers or get_active_config().experiment.max_workers
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(row, [float(t) for t in t_seq]))

    table = ConvergenceTable(experiment="dilation", metadata={"f": f.label(), "p": p, "u": u.label})
    table.declare("norm", "nondecreasing")
    table.declare("difference", "nonincreasing")
    for t, norm_t, _ in rows:
        table.add("norm", t, norm_t.value, reference=full.value,
                  converged=norm_t.converged, est_error=norm_t.est_error)
    for t, _, diff in rows:
        table.add("difference", t, diff.value, reference=0.0, converged=diff.converged, est_error=diff.est_error)
    for t, norm_t, diff in rows:
        logger.info(f"dilation t={t:.6g}: ‖f_t‖={norm_t.value:.12g}, ‖f_t-f‖={diff.value:.3g}")
    return table


def canonical_ball_experiment(f: AnalyticFunction, p: float, t_seq: Sequence[float],
                              tol: Optional[float] = None) -> ConvergenceTable:
    """u_k = G(·, t_k) 下的 ‖f‖^p，记录首次超过 1 的 t_k"""
    p = as_exponent(p)
    reference = float(np.abs(f.trace(0.0))) ** p
    table = ConvergenceTable(experiment="balls", metadata={"f": f.label(), "p": p})
    first_exit = None
    for t in t_seq:
        t = float(t)
        result = norm_boundary(f, p, Exhaustion.atom(t), tol=tol)
        table.add("ball", t, result.power, reference=reference, converged=result.converged,
                  est_error=result.report.est_error)
        if first_exit is None and result.power > 1.0:
            first_exit = t
        logger.info(f"balls t={t:.6g}: ‖f‖^p={result.power:.12g}")
    table.metadata["first_exit"] = first_exit
    table.metadata["sup_norm"] = f.boundary_sup()
    return table


def weakstar_study(u: Exhaustion, h: HarmonicFunction, phi: TestField, p: float,
                   r_seq: Sequence[float], tol: Optional[float] = None, grid_n: Optional[int] = None,
                   include_unit: bool = True, max_workers: Optional[int] = None) -> ConvergenceTable:
    """
    ∫ φ h dμ_{u,r} 走等值线路线，参考值为边界配对 μ_u(φ|𝕋·h*)
    include_unit 时另附 φ ≡ 1 的一列（μ_{u,r} 在 h^p_u 对偶中的弱*收敛）
    """
    p = HardyExponent(float(p)).require_harmonic().p
    if not harmonic_norm(h.source, p, u).finite:
        raise PreconditionError(f"{h.label()} 不属于 h^{p:g}_u")

    def product(z):
        return phi(z) * h.values(z)

    angles = h.singular_angles()
    reference = boundary_pair_report(u, lambda theta: phi.boundary(theta) * h.trace(theta),
                                     singular_angles=angles).value
    unit_reference = boundary_pair_report(u, h.trace, singular_angles=angles).value

    jobs = [("weakstar", r, product) for r in r_seq]
    if include_unit:
        jobs += [("unit", r, h.values) for r in r_seq]

    def run(job):
        series, r, density = job
        return series, mu_pair_contour(u, float(r), density, grid_n=grid_n, tol=tol)

    workers = max_workers or get_active_config().experiment.max_workers
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(run, jobs))

    table = ConvergenceTable(experiment="weakstar",
                             metadata={"u": u.label, "h": h.label(), "phi": phi.name, "p": p})
    table.declare("weakstar", "nonincreasing", column="abs_error")
    for series, pairing in results:
        ref = reference if series == "weakstar" else unit_reference
        table.add(series, pairing.r, pairing.value, reference=ref,
                  converged=pairing.converged, est_error=pairing.est_error)
        logger.info(f"weakstar [{series}] r={pairing.r:.6g}: {pairing.value:.12g} (参考 {ref:.12g})")
    return table


def density_study(f: AnalyticFunction, p: float, u: Exhaustion, schedule: Sequence[Tuple[float, int]],
                  tol: Optional[float] = None, max_workers: Optional[int] = None) -> ConvergenceTable:
    """
    多项式逼近：section 列为 ‖S_n(f_t) - f_t‖，total 列为 ‖S_n(f_t) - f‖，参数为 n
    """
    p = as_exponent(p)
    _require_member(f, p, u)
    angles = f.singular_angles()

    def row(item):
        t, n = float(item[0]), int(item[1])
        ft = f.dilate(t)
        section = ft.taylor_section(n)

        def section_power(theta):
            z = np.exp(1j * theta)
            return np.abs(section.values(z) - ft.values(z)) ** p

        def total_power(theta):
            with np.errstate(all='ignore'):
                return np.abs(section.values(np.exp(1j * theta)) - f.trace(theta)) ** p

        sec = boundary_norm_of_trace(section_power, p, u, tol=tol)
        tot = boundary_norm_of_trace(total_power, p, u, singular_angles=angles, tol=tol)
        return n, sec, tot

    workers = max_workers or get_active_config().experiment.max_workers
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(row, schedule))

    table = ConvergenceTable(experiment="density", metadata={"f": f.label(), "p": p, "u": u.label,
                                                             "schedule": [[float(t), int(n)] for t, n in schedule]})
    table.declare("section", "nonincreasing")
    table.declare("total", "nonincreasing")
    for n, sec, _ in rows:
        table.add("section", n, sec.value, converged=sec.converged, est_error=sec.est_error)
    for n, _, tot in rows:
        table.add("total", n, tot.value, reference=0.0, converged=tot.converged, est_error=tot.est_error)
    return table


class NormPair(NamedTuple):
    """(‖f‖_{H^p_u}, ‖f‖_{H^p_v})，要求 v ≤ u"""
    u_norm: NormResult
    v_norm: NormResult

    @property
    def ordered(self) -> bool:
        slack = self.u_norm.est_error + self.v_norm.est_error + 1e-12
        return self.u_norm.value <= self.v_norm.value + slack


def check_dominated(v: Exhaustion, u: Exhaustion, samples: int = 100) -> bool:
    """在 10^4 个网格点上抽样检查 v ≤ u"""
    xs = np.linspace(-0.995, 0.995, samples)
    Z = (xs[None, :] + 1j * xs[:, None]).ravel()
    Z = Z[np.abs(Z) < 1.0]
    with np.errstate(all='ignore'):
        uv, vv = u.field(Z), v.field(Z)
    finite = np.isfinite(uv) & np.isfinite(vv)
    return bool(np.all(vv[finite] <= uv[finite] + 1e-12))


def norm_comparison(f: AnalyticFunction, p: float, u: Exhaustion, v: Exhaustion,
                    tol: Optional[float] = None) -> NormPair:
    """v ≤ u 时 ‖f‖_{H^p_u} ≤ ‖f‖_{H^p_v}"""
    if not check_dominated(v, u):
        raise PreconditionError(f"抽样发现 v ≰ u: u={u.label}, v={v.label}")
    pair = NormPair(norm_boundary(f, p, u, tol=tol), norm_boundary(f, p, v, tol=tol))
    logger.info(f"compare: ‖f‖_u={pair.u_norm.value:.12g}, ‖f‖_v={pair.v_norm.value:.12g}")
    return pair


@dataclass(frozen=True)
class EquivalenceBounds:
    """(min α)^{1/p}‖f‖_{H^p} ≤ ‖f‖_{H^p_u} ≤ (max α)^{1/p}‖f‖_{H^p}"""
    lower: float
    upper: float

    def contains(self, classical: float, weighted: float, slack: float = 1e-9) -> bool:
        return self.lower * classical - slack <= weighted <= self.upper * classical + slack


def equivalence_bounds(u: Exhaustion, p: float) -> EquivalenceBounds:
    """α 有界时与经典范数的等价常数（α 的采样最小、最大值）"""
    p = as_exponent(p)
    density = alpha(u)
    return EquivalenceBounds(density.lower_bound ** (1.0 / p), density.upper_bound ** (1.0 / p))


def riesz_decomposition_gap(f: AnalyticFunction, p: float, w, tol: Optional[float] = None) -> float:
    """|f(w)|^p - (Poisson 积分 + ∫ G(w,z) Δ|f|^p(z) dA)，数值上应接近 0"""
    p = as_exponent(p)
    w = complex(as_disk(w))
    if not f.regular_on_closed_disk:
        raise DomainError(f"{f.label()} 需要在闭圆盘邻域内解析")
    extension = harmonic_extension_report(lambda theta: f.trace_abs_power(p, theta), w, tol=tol)

    def density(z):
        with np.errstate(all='ignore'):
            return green_kernel(w, z) * f.lap_density(p, z)

    singular = (w,) + tuple(f.zeros() if p < 2 else ())
    area = disk_integrate(density, region=Region.unit_disk(), singular_points=singular, tol=tol)
    if not (extension.converged and area.converged):
        raise QuadratureBudgetError("Riesz 分解检查的积分未收敛",
                                    report=QuadratureReport.combine([extension, area]))
    return float(f.abs_power(p, w)) - (extension.value + area.value)
