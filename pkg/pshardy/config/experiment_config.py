# -*- coding: utf-8 -*-
"""
实验配置文档
JSON 文本解析为 pydantic 模型；validate() 只做结构检查，不做任何计算
"""
import difflib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ValidationError

from ..utils.errors import ConfigError

logger = logging.getLogger(__name__)

EXPERIMENTS = (
    "norm", "alpha", "mu-pair", "monotone", "weakstar",
    "dilation", "balls", "density", "strict-inclusion", "compare",
)

# 每个实验必需的字段
REQUIRED_FIELDS = {
    "norm": ("exhaustion", "function"),
    "alpha": ("exhaustion",),
    "mu-pair": ("exhaustion",),
    "monotone": ("exhaustion",),
    "weakstar": ("exhaustion", "function"),
    "dilation": ("exhaustion", "function"),
    "balls": ("function",),
    "density": ("exhaustion", "function"),
    "strict-inclusion": ("exhaustion", "function"),
    "compare": ("exhaustion", "compare_with", "function"),
}

PHI_CHOICES = ("one", "modulus_squared", "abs_power")

WEIGHT_SUM_TOL = 1e-12


class SeriesRecord(BaseModel):
    """原子级数 a_k = 1 - pole_base^k, c_k = (1-ρ)ρ^{k-1}"""
    kind: str = "boundary_witness"
    pole_base: float = 0.25
    weight_base: float = 0.5


class ExhaustionRecord(BaseModel):
    """(re, im, weight) 三元组 + 二次分量权重；或一个原子级数"""
    atoms: List[Tuple[float, float, float]] = []
    quad_weight: float = 0.0
    series: Optional[SeriesRecord] = None
    name: str = ""

    def build(self):
        from ..utils.exhaustion import Exhaustion, ExhaustionSeries

        if self.series is not None:
            if self.series.kind == "boundary_witness":
                return ExhaustionSeries.boundary_witness()
            return ExhaustionSeries(pole_base=self.series.pole_base, weight_base=self.series.weight_base,
                                    name=self.name or "series")
        return Exhaustion.from_triples(self.atoms, quad_weight=self.quad_weight, name=self.name)


class FunctionRecord(BaseModel):
    """poly 为升幂系数（实数或 [re, im]），factors 为 (c_re, c_im, gamma)"""
    poly: List[Union[float, Tuple[float, float]]] = [1.0]
    factors: List[Tuple[float, float, float]] = []

    def coefficients(self) -> List[complex]:
        return [complex(a[0], a[1]) if isinstance(a, (tuple, list)) else complex(a) for a in self.poly]

    def build(self):
        from ..utils.analytic import AnalyticFunction

        return AnalyticFunction(poly=tuple(self.coefficients()),
                                factors=tuple((complex(re, im), g) for re, im, g in self.factors))


class ToleranceRecord(BaseModel):
    periodic: Optional[float] = None
    area: Optional[float] = None
    contour: Optional[float] = None
    grid_n: Optional[int] = None
    preset: Optional[str] = None


class ExperimentConfig(BaseModel):
    """一次实验运行的完整描述"""
    experiment: str = ""
    exhaustion: Optional[ExhaustionRecord] = None
    compare_with: Optional[ExhaustionRecord] = None
    function: Optional[FunctionRecord] = None
    p: float = 2.0
    phi: str = "one"
    r_seq: Optional[List[float]] = None
    t_seq: Optional[List[float]] = None
    k_seq: Optional[List[int]] = None
    theta_seq: Optional[List[float]] = None
    schedule: Optional[List[Tuple[float, int]]] = None
    tolerances: ToleranceRecord = ToleranceRecord()
    format: str = "csv"
    output: Optional[str] = None


@dataclass
class Violation:
    name: str
    message: str
    suggestions: List[str] = field(default_factory=list)

    def __str__(self) -> str:
        text = f"{self.name}: {self.message}"
        if self.suggestions:
            text += f" (候选: {', '.join(self.suggestions)})"
        return text


@dataclass
class ValidationReport:
    """dry-run 结果；violations 为空即通过"""
    violations: List[Violation] = field(default_factory=list)
    config: Optional[ExperimentConfig] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, name: str, message: str, suggestions: Sequence[str] = ()) -> None:
        self.violations.append(Violation(name, message, list(suggestions)))

    def names(self) -> List[str]:
        return [v.name for v in self.violations]

    def raise_if_failed(self) -> ExperimentConfig:
        if self.violations:
            raise ConfigError("配置校验失败: " + "; ".join(str(v) for v in self.violations),
                              violations=self.violations)
        return self.config


def _strictly_monotone(values: Sequence[float]) -> bool:
    increasing = all(b > a for a, b in zip(values, values[1:]))
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    return increasing or decreasing


def _check_exhaustion(report: ValidationReport, record: ExhaustionRecord, prefix: str) -> None:
    if record.series is not None:
        s = record.series
        if s.kind not in ("boundary_witness", "geometric"):
            report.add(f"{prefix}.series_kind", f"未知的级数类型 {s.kind}",
                       difflib.get_close_matches(s.kind, ["boundary_witness", "geometric"]))
        if not (0 < s.pole_base < 1 and 0 < s.weight_base < 1):
            report.add(f"{prefix}.series_bases", "pole_base 与 weight_base 必须在 (0,1) 内")
        return
    if record.quad_weight < 0:
        report.add(f"{prefix}.quad_weight", f"二次分量权重不能为负: {record.quad_weight}")
    poles = []
    for re, im, w in record.atoms:
        if not abs(complex(re, im)) < 1:
            report.add(f"{prefix}.pole_in_disk", f"极点 ({re}, {im}) 不在单位圆盘内")
        if not w > 0:
            report.add(f"{prefix}.weights_positive", f"原子权重必须为正: {w}")
        poles.append((re, im))
    if len(set(poles)) != len(poles):
        report.add(f"{prefix}.poles_distinct", "极点必须互不相同")
    total = math.fsum([w for _, _, w in record.atoms] + [record.quad_weight])
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        report.add(f"{prefix}.weights_sum", f"权重和必须为 1，实际 {total:.15g}")


def validate(config: Union[ExperimentConfig, Dict[str, Any]], experiment: Optional[str] = None) -> ValidationReport:
    """结构检查：实验名、必需字段、权重和、序列单调、容差为正等"""
    report = ValidationReport()
    if not isinstance(config, ExperimentConfig):
        try:
            config = ExperimentConfig.model_validate(config)
        except ValidationError as e:
            for err in e.errors():
                loc = ".".join(str(x) for x in err.get("loc", ()))
                report.add(f"config.{loc or 'root'}", err.get("msg", "格式错误"))
            return report

    if experiment:
        if config.experiment and config.experiment != experiment:
            report.add("experiment.mismatch", f"命令行实验 {experiment} 与配置中的 {config.experiment} 不一致")
        config = config.model_copy(update={"experiment": experiment})
    report.config = config

    name = config.experiment
    if name not in EXPERIMENTS:
        report.add("experiment.unknown", f"未知的实验名 '{name}'",
                   difflib.get_close_matches(name, EXPERIMENTS, n=3, cutoff=0.3) or list(EXPERIMENTS))
        return report

    for required in REQUIRED_FIELDS[name]:
        if getattr(config, required) is None:
            report.add(f"{required}.required", f"实验 {name} 需要字段 {required}")

    if config.exhaustion is not None:
        _check_exhaustion(report, config.exhaustion, "exhaustion")
        if config.exhaustion.series is not None and name != "strict-inclusion":
            report.add("exhaustion.series", "只有 strict-inclusion 实验接受原子级数")
    if config.compare_with is not None:
        _check_exhaustion(report, config.compare_with, "compare_with")

    if config.function is not None:
        for re, im, g in config.function.factors:
            if abs(complex(re, im)) > 1 + 1e-15:
                report.add("function.factor_in_disk", f"因子参数 ({re}, {im}) 必须满足 |c| <= 1")
            if not g > 0:
                report.add("function.gamma_positive", f"因子指数必须为正: {g}")

    if not (math.isfinite(config.p) and config.p > 0):
        report.add("p.positive", f"p 必须为正: {config.p}")
    elif name == "weakstar" and config.p <= 1:
        report.add("p.harmonic", f"调和函数实验要求 p > 1: {config.p}")

    if config.phi not in PHI_CHOICES:
        report.add("phi.choice", f"未知的测试函数 '{config.phi}'",
                   difflib.get_close_matches(config.phi, PHI_CHOICES) or list(PHI_CHOICES))
    if config.phi == "abs_power" and config.function is None:
        report.add("function.required", "phi = abs_power 需要字段 function")

    for key in ("r_seq", "t_seq", "k_seq", "theta_seq"):
        values = getattr(config, key)
        if values is None:
            continue
        if not values:
            report.add(f"{key}.empty", f"{key} 不能为空")
        elif not _strictly_monotone(values):
            report.add(f"{key}.monotone", f"{key} 必须严格单调")
    if config.r_seq and any(not r < 0 for r in config.r_seq):
        report.add("r_seq.negative", "r 必须全部为负")
    if config.t_seq and any(not 0 < t < 1 for t in config.t_seq):
        report.add("t_seq.range", "t 必须在 (0,1) 内")
    if config.k_seq and any(k < 1 for k in config.k_seq):
        report.add("k_seq.positive", "截断阶必须 >= 1")
    if config.schedule is not None:
        ts = [t for t, _ in config.schedule]
        ns = [n for _, n in config.schedule]
        if not config.schedule:
            report.add("schedule.empty", "schedule 不能为空")
        elif not (all(0 < t < 1 for t in ts) and all(n >= 0 for n in ns)):
            report.add("schedule.range", "schedule 中 t 必须在 (0,1) 内且 n >= 0")
        elif not (_strictly_monotone(ts) and all(b > a for a, b in zip(ns, ns[1:]))):
            report.add("schedule.monotone", "schedule 的 t 与 n 必须严格递增")

    tol = config.tolerances
    for key in ("periodic", "area", "contour"):
        value = getattr(tol, key)
        if value is not None and not value > 0:
            report.add("tolerances.positive", f"容差 {key} 必须为正: {value}")
    if tol.grid_n is not None and tol.grid_n < 16:
        report.add("tolerances.grid_n", f"grid_n 过小: {tol.grid_n}")
    if tol.preset is not None and tol.preset not in ("fast", "standard", "accurate"):
        report.add("tolerances.preset", f"未知的预设 '{tol.preset}'",
                   difflib.get_close_matches(tol.preset, ["fast", "standard", "accurate"]))

    if config.format not in ("csv", "json"):
        report.add("format.choice", f"输出格式只能是 csv 或 json: {config.format}")

    return report


def parse_config_text(text: str) -> Dict[str, Any]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置不是合法的 JSON: {e}",
                          violations=[Violation("config.json", str(e))]) from e
    if not isinstance(document, dict):
        raise ConfigError("配置顶层必须是对象", violations=[Violation("config.root", "顶层必须是对象")])
    return document


def load_config(path, experiment: Optional[str] = None) -> ExperimentConfig:
    """读取并校验配置文件，失败时抛出 ConfigError"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}", violations=[Violation("config.path", str(path))])
    document = parse_config_text(path.read_text(encoding="utf-8"))
    report = validate(document, experiment=experiment)
    config = report.raise_if_failed()
    logger.info(f"已加载配置: {path} (实验 {config.experiment})")
    return config
