# -*- coding: utf-8 -*-
"""
异常体系
数值库与 CLI 共用，CLI 按类型映射退出码
"""
from typing import List, Optional


class PsHardyError(Exception):
    """所有 pshardy 异常的基类"""


class DomainError(PsHardyError, ValueError):
    """点或参数越出定义域（|z| >= 1、r >= 0、消费了 -inf 哨兵等）"""


class DegenerateLevelError(PsHardyError):
    """等值线经过临界点附近，r 不是正则值"""

    def __init__(self, message: str, r: float, min_gradient: float):
        super().__init__(message)
        self.r = r
        self.min_gradient = min_gradient


class QuadratureBudgetError(PsHardyError):
    """积分预算耗尽而调用方需要一个确定的数"""

    def __init__(self, message: str, report=None, table=None):
        super().__init__(message)
        self.report = report
        # 出错前已完成的部分结果表，由 ConvergenceTable.guard 挂上
        self.table = table


class PreconditionError(PsHardyError):
    """采样检查到前置条件不成立"""


class ConfigError(PsHardyError):
    """实验配置校验失败，violations 中每一项都写明违反的约束"""

    def __init__(self, message: str, violations: Optional[List] = None):
        super().__init__(message)
        self.violations = list(violations or [])
