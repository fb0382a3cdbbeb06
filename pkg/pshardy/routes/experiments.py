# -*- coding: utf-8 -*-
"""
实验路由
实验名 -> 执行函数；每个执行函数返回结果表和一组不变量检查
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..config.experiment_config import ExperimentConfig
from ..config.solver_config import get_active_config
from ..utils.analytic import AnalyticFunction, HarmonicFunction
from ..utils.exhaustion import Exhaustion, alpha, normal_derivative
from ..utils.hardy import (
    canonical_ball_experiment,
    density_study,
    dilation_study,
    membership,
    norm_boundary,
    norm_comparison,
    norm_levels,
    norm_riesz,
    weakstar_study,
)
from ..utils.measures import TestField, monotonicity_table, mu_pair_contour, mu_pair_lj
from ..utils.tables import ConvergenceTable

logger = logging.getLogger(__name__)

# 法向导数差商使用的 s
NORMAL_DERIVATIVE_S = 1.0 - 1e-6


@dataclass
class ExperimentOutcome:
    """一次实验的结果表与检查项"""
    table: ConvergenceTable
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def converged(self) -> bool:
        return self.table.converged

    def summary(self) -> str:
        checks = ",".join(f"{k}={'pass' if v else 'fail'}" for k, v in self.checks.items()) or "none"
        status = "pass" if self.passed and self.converged else "fail"
        return (f"SUMMARY experiment={self.table.experiment} status={status} rows={len(self.table.rows)} "
                f"converged={'true' if self.converged else 'false'} checks={checks}")


# 各实验输出列的说明（--help 使用）
EXPERIMENT_COLUMNS = {
    "norm": "series levels(parameter=r)/extrapolated/riesz/boundary(parameter=p)；value 为范数，reference 为边界路线",
    "alpha": "series alpha(parameter=θ, reference=法向导数差商)/mass/lower_bound",
    "mu-pair": "series lelong_jensen / contour(reference=LJ 值)，parameter=r",
    "monotone": "series mu(parameter=r, reference=边界配对 μ_u(φ))",
    "weakstar": "series weakstar / unit，parameter=r，reference=边界配对",
    "dilation": "series norm(reference=‖f‖) / difference(reference=0)，parameter=t",
    "balls": "series ball(parameter=t_k, value=‖f‖^p, reference=|f*(1)|^p)",
    "density": "series section / total(reference=0)，parameter=n",
    "strict-inclusion": "series partial(parameter=K) / ratio / classical",
    "compare": "series u / v，parameter=p",
}


def default_r_seq() -> List[float]:
    return [-2.0 ** -k for k in get_active_config().experiment.r_exponents]


def _r_seq(config: ExperimentConfig) -> List[float]:
    return list(config.r_seq) if config.r_seq else default_r_seq()


def _exhaustion(config: ExperimentConfig) -> Exhaustion:
    return config.exhaustion.build()


def _function(config: ExperimentConfig) -> AnalyticFunction:
    return config.function.build()


def _phi(config: ExperimentConfig) -> TestField:
    if config.phi == "modulus_squared":
        return TestField.modulus_squared()
    if config.phi == "abs_power":
        return TestField.from_analytic(_function(config), config.p)
    return TestField.constant(1.0)


def run_norm(config: ExperimentConfig) -> ExperimentOutcome:
    f, u, p = _function(config), _exhaustion(config), config.p
    boundary = norm_boundary(f, p, u)
    table = ConvergenceTable(experiment="norm", metadata={"f": f.label(), "p": p, "u": u.label})
    checks: Dict[str, bool] = {"boundary_finite": boundary.finite}

    if f.regular_on_closed_disk:
        levels = norm_levels(f, p, u, _r_seq(config))
        table.declare("levels", "nondecreasing")
        for row in levels.table.rows:
            value = max(row.value, 0.0) ** (1.0 / p)
            est = value / (p * row.value) * row.est_error if row.value > 0 else row.est_error
            table.add("levels", row.parameter, value, reference=boundary.value,
                      converged=row.converged, est_error=est)
        scale = max(1.0, boundary.value)
        # 只有一个 r 时无法外推
        if levels.extrapolated is not None:
            table.add("extrapolated", 0.0, levels.extrapolated, reference=boundary.value,
                      converged=levels.converged)
            checks["levels_gap"] = abs(levels.extrapolated - boundary.value) <= 1e-3 * scale
        with table.guard("riesz", p):
            riesz = norm_riesz(f, p, u)
        table.add("riesz", p, riesz.value, reference=boundary.value, converged=riesz.converged,
                  est_error=riesz.est_error)
        checks["riesz_agreement"] = abs(riesz.value - boundary.value) <= 1e-4 * scale

    table.add("boundary", p, boundary.value, converged=boundary.converged, est_error=boundary.est_error)
    checks.update(table.monotone_flags())
    return ExperimentOutcome(table, checks)


def run_alpha(config: ExperimentConfig) -> ExperimentOutcome:
    u = _exhaustion(config)
    density = alpha(u)
    thetas = config.theta_seq or list(2 * math.pi * np.arange(16) / 16)
    table = ConvergenceTable(experiment="alpha", metadata={"u": u.label, "s": NORMAL_DERIVATIVE_S})
    for theta in thetas:
        with table.guard("alpha", theta):
            quotient = normal_derivative(u, theta, NORMAL_DERIVATIVE_S)
        table.add("alpha", theta, density(theta), reference=quotient)
    table.add("mass", 0.0, density.l1_mass, reference=1.0,
              converged=density.mass_report.converged, est_error=density.mass_report.est_error)
    table.add("lower_bound", 0.0, density.lower_bound, reference=density.analytic_lower_bound)
    checks = {
        "mass": abs(density.l1_mass - 1.0) <= 1e-8,
        "positive": density.lower_bound > 0,
        "poisson_lower_bound": density.lower_bound >= density.analytic_lower_bound - 1e-12,
    }
    return ExperimentOutcome(table, checks)


def run_mu_pair(config: ExperimentConfig) -> ExperimentOutcome:
    u, phi = _exhaustion(config), _phi(config)
    grid_n = config.tolerances.grid_n
    table = ConvergenceTable(experiment="mu-pair", metadata={"u": u.label, "phi": phi.name})
    agree = True
    for r in _r_seq(config):
        with table.guard("lelong_jensen", r):
            lj = mu_pair_lj(u, r, phi)
        table.add("lelong_jensen", r, lj.value, converged=lj.converged, est_error=lj.est_error)
        with table.guard("contour", r):
            contour = mu_pair_contour(u, r, phi, grid_n=grid_n)
        table.add("contour", r, contour.value, reference=lj.value,
                  converged=contour.converged, est_error=contour.est_error)
        agree = agree and abs(lj.value - contour.value) <= lj.est_error + contour.est_error
        logger.info(f"mu-pair r={r:.6g}: LJ={lj.value:.12g}, contour={contour.value:.12g}")
    return ExperimentOutcome(table, {"route_agreement": agree})


def run_monotone(config: ExperimentConfig) -> ExperimentOutcome:
    table = monotonicity_table(_exhaustion(config), _phi(config), _r_seq(config))
    return ExperimentOutcome(table, table.monotone_flags())


def run_weakstar(config: ExperimentConfig) -> ExperimentOutcome:
    h = HarmonicFunction(_function(config))
    table = weakstar_study(_exhaustion(config), h, _phi(config), config.p, _r_seq(config),
                           tol=config.tolerances.contour, grid_n=config.tolerances.grid_n)
    return ExperimentOutcome(table, table.monotone_flags())


def run_dilation(config: ExperimentConfig) -> ExperimentOutcome:
    t_seq = config.t_seq or [0.5, 0.9, 0.99, 0.999]
    table = dilation_study(_function(config), config.p, _exhaustion(config), t_seq)
    return ExperimentOutcome(table, table.monotone_flags())


def run_balls(config: ExperimentConfig) -> ExperimentOutcome:
    t_seq = config.t_seq or [0.5, 0.9, 0.99, 0.999]
    table = canonical_ball_experiment(_function(config), config.p, t_seq)
    exits = table.metadata["sup_norm"] <= 1.0 or table.metadata["first_exit"] is not None
    return ExperimentOutcome(table, {"exit_flagged": exits})


def default_density_schedule(levels: int = 8) -> List[Tuple[float, int]]:
    """t = 1 - 2^{-j}, n = 2^j"""
    return [(1.0 - 2.0 ** -j, 2 ** j) for j in range(1, levels + 1)]


def run_density(config: ExperimentConfig) -> ExperimentOutcome:
    schedule = [tuple(item) for item in config.schedule] if config.schedule else default_density_schedule()
    table = density_study(_function(config), config.p, _exhaustion(config), schedule)
    return ExperimentOutcome(table, table.monotone_flags())


def run_strict_inclusion(config: ExperimentConfig) -> ExperimentOutcome:
    f, p = _function(config), config.p
    target = config.exhaustion.build()
    result = membership(f, p, target, k_seq=config.k_seq)
    table = result.table or ConvergenceTable(experiment="strict-inclusion")
    if result.table is None:
        table.add("boundary", p, result.norm.value, converged=result.norm.converged)
    classical = norm_boundary(f, p, Exhaustion.atom(0.0))
    table.add("classical", p, classical.value, converged=classical.converged, est_error=classical.est_error)
    table.metadata["status"] = result.status
    checks = {
        "decided": result.status != "inconclusive",
        "classical_finite": classical.finite and classical.converged,
    }
    checks.update(table.monotone_flags())
    return ExperimentOutcome(table, checks)


def run_compare(config: ExperimentConfig) -> ExperimentOutcome:
    f, p = _function(config), config.p
    u, v = _exhaustion(config), config.compare_with.build()
    pair = norm_comparison(f, p, u, v)
    table = ConvergenceTable(experiment="compare", metadata={"f": f.label(), "u": u.label, "v": v.label})
    table.add("u", p, pair.u_norm.value, converged=pair.u_norm.converged, est_error=pair.u_norm.est_error)
    table.add("v", p, pair.v_norm.value, converged=pair.v_norm.converged, est_error=pair.v_norm.est_error)
    return ExperimentOutcome(table, {"ordered": pair.ordered})


EXPERIMENT_RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentOutcome]] = {
    "norm": run_norm,
    "alpha": run_alpha,
    "mu-pair": run_mu_pair,
    "monotone": run_monotone,
    "weakstar": run_weakstar,
    "dilation": run_dilation,
    "balls": run_balls,
    "density": run_density,
    "strict-inclusion": run_strict_inclusion,
    "compare": run_compare,
}


def run_experiment(config: ExperimentConfig) -> ExperimentOutcome:
    """按实验名分派"""
    runner = EXPERIMENT_RUNNERS[config.experiment]
    logger.info(f"开始实验: {config.experiment}")
    outcome = runner(config)
    logger.info(f"实验完成: {config.experiment}, {len(outcome.table.rows)} 行")
    return outcome
