# -*- coding: utf-8 -*-
"""
pshardy
单位圆盘上的 Demailly 测度、加权 Hardy 范数与边界密度的数值计算
"""
from .utils.errors import (
    ConfigError,
    DegenerateLevelError,
    DomainError,
    PreconditionError,
    PsHardyError,
    QuadratureBudgetError,
)
from .utils.kernels import (
    BoundaryAngle,
    DiskPoint,
    green,
    green_normal_derivative,
    harmonic_extension,
    poisson,
    poisson_convolve,
)
from .utils.quadrature import (
    PolylineContour,
    QuadratureReport,
    Region,
    contour_integrate,
    contour_integrate_curved,
    disk_integrate,
    periodic_integrate,
    trace_levelset,
)
from .utils.exhaustion import (
    BoundaryDensity,
    Exhaustion,
    ExhaustionSeries,
    alpha,
    boundary_pair,
    eval_u,
    grad_u,
    normal_derivative,
    p_r,
)
from .utils.analytic import (
    AnalyticFunction,
    HarmonicFunction,
    HardyExponent,
    boundary_trace,
    deriv,
    dilate,
    lap_density_fp,
    taylor_section,
)
from .utils.measures import LevelPairing, TestField, monotonicity_table, mu_mass, mu_pair_contour, mu_pair_lj
from .utils.hardy import (
    MembershipResult,
    NormResult,
    canonical_ball_experiment,
    density_study,
    dilation_study,
    equivalence_bounds,
    harmonic_norm,
    membership,
    norm_boundary,
    norm_comparison,
    norm_levels,
    norm_riesz,
    riesz_decomposition_gap,
    weakstar_study,
)
from .utils.tables import ConvergenceTable

__version__ = "0.1.0"
