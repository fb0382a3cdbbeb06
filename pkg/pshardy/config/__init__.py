# -*- coding: utf-8 -*-
"""配置模块"""
from .solver_config import (
    DEFAULT_CONFIG,
    PRESET_CONFIGS,
    ContourConfig,
    ExperimentDefaults,
    QuadratureConfig,
    SolverConfig,
    get_active_config,
    get_config_for_preset,
    set_active_config,
)
from .experiment_config import (
    EXPERIMENTS,
    ExhaustionRecord,
    ExperimentConfig,
    FunctionRecord,
    ToleranceRecord,
    ValidationReport,
    load_config,
    validate,
)
