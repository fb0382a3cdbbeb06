# -*- coding: utf-8 -*-
"""
数值求解配置文件
包含积分容差、预算、等值线网格、实验并行度等配置选项
"""
import os
import logging
from typing import Dict, List, Optional
from dataclasses import dataclass, field, replace

logger = logging.getLogger(__name__)


@dataclass
class QuadratureConfig:
    """积分引擎配置"""
    # 周期梯形公式容差（对 dλ 归一化后的积分）
    periodic_tol: float = 1e-8

    # 梯形公式最大节点数，超出后返回 converged=False
    max_nodes: int = 2 ** 20

    # 声明奇异角后交给 QUADPACK 的最大子区间数
    quad_limit: int = 2000

    # 面积分容差
    area_tol: float = 1e-6

    # 四叉树预算（已求值的单元数）
    max_cells: int = 200_000

    # 初始网格深度：2^base_depth 个单元每边
    base_depth: int = 3

    # 最深层数，超过后单元不再细分，误差计入 est_error
    max_depth: int = 48

    # 含奇点/锚点的单元强制细分到此深度（h = 2^(1-depth)）
    anchor_depth: int = 11

    # 声明奇点周围排除的小圆盘半径；圆盘内的贡献按局部幂次估计上界，计入 est_error
    singular_radius: float = 1e-10

    # 单元上的 Gauss-Legendre 阶数
    gauss_order: int = 8

    # 切割单元每条线上的采样点数
    line_samples: int = 5


@dataclass
class ContourConfig:
    """等值线提取配置"""
    grid_n: int = 512

    # 正则值判据：等值线上 |∇u| 的下界
    min_gradient: float = 1e-6

    # 退化时 r 的微调步长与次数
    nudge: float = 1e-9
    max_nudges: int = 10

    # 线积分规则: "curved"（抛物线 Simpson）或 "midpoint"
    rule: str = "curved"

    # 积分路线一致性容差
    tol: float = 1e-6


@dataclass
class ExperimentDefaults:
    """实验默认参数"""
    # r_k = -2^{-k}
    r_exponents: List[int] = field(default_factory=lambda: list(range(1, 13)))

    # 行级并行度
    max_workers: int = 4

    # 截断阶 K
    k_seq: List[int] = field(default_factory=lambda: list(range(8, 21)))


@dataclass
class SolverConfig:
    """求解系统总配置"""
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    contour: ContourConfig = field(default_factory=ContourConfig)
    experiment: ExperimentDefaults = field(default_factory=ExperimentDefaults)

    @classmethod
    def load_from_env(cls) -> 'SolverConfig':
        """从环境变量加载配置"""
        config = cls()

        # 积分配置
        config.quadrature.periodic_tol = float(os.getenv("PSHARDY_PERIODIC_TOL", "1e-8"))
        config.quadrature.area_tol = float(os.getenv("PSHARDY_AREA_TOL", "1e-6"))
        config.quadrature.max_cells = int(os.getenv("PSHARDY_MAX_CELLS", "200000"))
        config.quadrature.quad_limit = int(os.getenv("PSHARDY_QUAD_LIMIT", "2000"))

        # 等值线配置
        config.contour.grid_n = int(os.getenv("PSHARDY_GRID_N", "512"))
        config.contour.rule = os.getenv("PSHARDY_CONTOUR_RULE", "curved").lower()

        # 实验配置
        config.experiment.max_workers = int(os.getenv("PSHARDY_MAX_WORKERS", "4"))

        if config.contour.rule not in ("curved", "midpoint"):
            logger.warning(f"未知的线积分规则 {config.contour.rule}，改用 curved")
            config.contour.rule = "curved"

        return config

    def with_tolerance(self, tol: float) -> 'SolverConfig':
        """返回覆盖了全部容差的新配置（CLI 的 --tol）"""
        return SolverConfig(
            quadrature=replace(self.quadrature, periodic_tol=min(tol, self.quadrature.periodic_tol), area_tol=tol),
            contour=replace(self.contour, tol=tol),
            experiment=replace(self.experiment),
        )

    def with_overrides(self, periodic_tol: Optional[float] = None, area_tol: Optional[float] = None,
                       contour_tol: Optional[float] = None, grid_n: Optional[int] = None) -> 'SolverConfig':
        """按实验配置中的 tolerances 覆盖，未给出的项保持不变"""
        quadrature = replace(self.quadrature)
        contour = replace(self.contour)
        if periodic_tol is not None:
            quadrature.periodic_tol = periodic_tol
        if area_tol is not None:
            quadrature.area_tol = area_tol
        if contour_tol is not None:
            contour.tol = contour_tol
        if grid_n is not None:
            contour.grid_n = grid_n
        return SolverConfig(quadrature=quadrature, contour=contour, experiment=replace(self.experiment))

    def to_dict(self) -> Dict:
        """转换为字典格式"""
        return {
            "quadrature": {
                "periodic_tol": self.quadrature.periodic_tol,
                "max_nodes": self.quadrature.max_nodes,
                "quad_limit": self.quadrature.quad_limit,
                "area_tol": self.quadrature.area_tol,
                "max_cells": self.quadrature.max_cells,
                "max_depth": self.quadrature.max_depth,
                "singular_radius": self.quadrature.singular_radius,
                "gauss_order": self.quadrature.gauss_order,
            },
            "contour": {
                "grid_n": self.contour.grid_n,
                "min_gradient": self.contour.min_gradient,
                "rule": self.contour.rule,
            },
            "experiment": {
                "r_exponents": list(self.experiment.r_exponents),
                "max_workers": self.experiment.max_workers,
            },
        }


# 默认配置实例
DEFAULT_CONFIG = SolverConfig()

# 预设配置
PRESET_CONFIGS = {
    "fast": SolverConfig(
        quadrature=QuadratureConfig(
            periodic_tol=1e-6,
            area_tol=1e-4,
            max_cells=50_000,
        ),
        contour=ContourConfig(
            grid_n=256,  # 粗网格，仅用于快速检查
            tol=1e-4,
        ),
    ),

    "standard": SolverConfig(),

    "accurate": SolverConfig(
        quadrature=QuadratureConfig(
            periodic_tol=1e-11,
            area_tol=1e-8,
            max_cells=800_000,
            gauss_order=10,
        ),
        contour=ContourConfig(
            grid_n=1024,
            tol=1e-8,
        ),
    ),
}

_active_config = DEFAULT_CONFIG


def get_config_for_preset(name: str) -> SolverConfig:
    """根据预设名获取配置"""
    return PRESET_CONFIGS.get(name, DEFAULT_CONFIG)


def get_active_config() -> SolverConfig:
    """库函数的默认参数来源"""
    return _active_config


def set_active_config(config: SolverConfig) -> None:
    """CLI 启动时设置一次"""
    global _active_config
    _active_config = config
    logger.debug(f"当前求解配置: {config.to_dict()}")
