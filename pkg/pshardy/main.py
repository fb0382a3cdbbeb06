# -*- coding: utf-8 -*-
"""
命令行入口
python -m pshardy <experiment> --config <path> [--out <path>] [--format csv|json] [--tol <x>] [--dry-run]

退出码: 0 成功；1 配置错误或意外异常；2 积分未收敛（结果表仍然写出，未收敛行已标记）
"""
import os
import sys
import logging
import argparse
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from .config.experiment_config import EXPERIMENTS, ExperimentConfig, Violation, parse_config_text, validate
from .config.solver_config import SolverConfig, get_config_for_preset, set_active_config
from .routes.experiments import EXPERIMENT_COLUMNS, run_experiment
from .utils.errors import ConfigError, PsHardyError, QuadratureBudgetError
from .utils.tables import ConvergenceTable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BUDGET = 2


def setup_logging() -> None:
    """日志写 stderr（stdout 只留给结果表与摘要行），PSHARDY_LOG_FILE 给出时另写文件"""
    level_name = os.getenv("PSHARDY_LOG_LEVEL", "INFO").upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = os.getenv("PSHARDY_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    columns = "\n".join(f"  {name:<17} {EXPERIMENT_COLUMNS[name]}" for name in EXPERIMENTS)
    parser = argparse.ArgumentParser(
        prog="pshardy",
        description="加权 Hardy 空间数值实验：输出收敛表",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "CSV 列固定为 series,parameter,value,reference,abs_error,converged\n"
            f"实验与各 series 含义:\n{columns}\n"
            "退出码: 0 成功, 1 配置错误, 2 积分未收敛"
        ),
    )
    parser.add_argument("experiment", help="实验名: " + ", ".join(EXPERIMENTS))
    parser.add_argument("--config", required=True, help="JSON 实验配置文件")
    parser.add_argument("--out", help="输出文件路径（缺省写 stdout）")
    parser.add_argument("--format", help="输出格式 csv 或 json（覆盖配置）")
    parser.add_argument("--tol", type=float, help="覆盖全部容差")
    parser.add_argument("--dry-run", action="store_true", help="只做配置校验，不计算")
    return parser


def configure_solver(config: ExperimentConfig, tol: Optional[float] = None) -> SolverConfig:
    """预设 / 环境变量 → 配置文件中的 tolerances → --tol"""
    tolerances = config.tolerances
    base = get_config_for_preset(tolerances.preset) if tolerances.preset else SolverConfig.load_from_env()
    solver = base.with_overrides(
        periodic_tol=tolerances.periodic,
        area_tol=tolerances.area,
        contour_tol=tolerances.contour,
        grid_n=tolerances.grid_n,
    )
    if tol is not None:
        solver = solver.with_tolerance(tol)
    set_active_config(solver)
    return solver


def _load(args) -> ExperimentConfig:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}", violations=[Violation("config.path", str(path))])
    document = parse_config_text(path.read_text(encoding="utf-8"))
    if args.format:
        document["format"] = args.format
    if args.tol is not None and not args.tol > 0:
        raise ConfigError(f"--tol 必须为正: {args.tol}", violations=[Violation("tolerances.positive", f"--tol {args.tol}")])
    report = validate(document, experiment=args.experiment)
    if args.dry_run:
        print(f"VALIDATION experiment={args.experiment} status={'ok' if report.ok else 'failed'} "
              f"violations={len(report.violations)}")
    return report.raise_if_failed()


def _emit(table: ConvergenceTable, fmt: str, out: Optional[str]) -> None:
    if out:
        table.write(out, fmt)
    else:
        sys.stdout.write(table.render(fmt))


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    setup_logging()
    args = build_parser().parse_args(argv)

    try:
        config = _load(args)
    except ConfigError as e:
        logger.error(f"配置错误: {e}")
        for violation in e.violations:
            print(f"CONFIG ERROR {violation}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        return EXIT_OK

    fmt = config.format
    out = args.out or config.output
    configure_solver(config, args.tol)

    try:
        outcome = run_experiment(config)
    except QuadratureBudgetError as e:
        logger.error(f"积分预算耗尽: {e}")
        table = e.table if e.table is not None else ConvergenceTable(experiment=config.experiment)
        table.metadata["error"] = str(e)
        _emit(table, fmt, out)
        print(f"SUMMARY experiment={config.experiment} status=fail rows={len(table.rows)} "
              f"converged=false checks=none")
        return EXIT_BUDGET
    except PsHardyError as e:
        logger.error(f"实验失败: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"意外错误: {str(e)}", exc_info=True)
        return EXIT_CONFIG

    _emit(outcome.table, fmt, out)
    print(outcome.summary())
    if not outcome.converged:
        logger.warning("存在未收敛的行，已在 converged 列中标记")
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
