# -*- coding: utf-8 -*-
"""
收敛表
每行 (series, parameter, value, reference, abs_error, converged)，
输出 CSV / JSON，写文件时先写临时文件再替换
"""
import csv
import io
import json
import os
import math
import logging
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel

from .errors import QuadratureBudgetError

logger = logging.getLogger(__name__)

COLUMNS = ("series", "parameter", "value", "reference", "abs_error", "converged")

# 单调性判定时允许的额外舍入余量
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class TableRow:
    series: str
    parameter: float
    value: float
    reference: Optional[float] = None
    abs_error: Optional[float] = None
    converged: bool = True
    est_error: float = 0.0


class RowSchema(BaseModel):
    """JSON 输出的行结构"""
    series: str
    parameter: float
    value: float
    reference: Optional[float] = None
    abs_error: Optional[float] = None
    converged: bool


class TableDocument(BaseModel):
    """JSON 输出的整体结构"""
    experiment: str
    columns: List[str]
    rows: List[RowSchema]
    monotone: Dict[str, bool] = {}
    metadata: Dict[str, Any] = {}


@dataclass
class ConvergenceTable:
    """实验输出表，可包含多个 series"""
    experiment: str
    rows: List[TableRow] = field(default_factory=list)
    # 标志名 -> (series, "nondecreasing"/"nonincreasing", 列名)
    declared: Dict[str, Tuple[str, str, str]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, series: str, parameter: float, value: float, reference: Optional[float] = None,
            converged: bool = True, est_error: float = 0.0) -> TableRow:
        abs_error = None if reference is None else abs(value - reference)
        row = TableRow(series, float(parameter), float(value),
                       None if reference is None else float(reference),
                       abs_error, bool(converged), float(est_error))
        self.rows.append(row)
        return row

    @contextmanager
    def guard(self, series: str, parameter: float):
        """
        包住一行的计算：预算耗尽时追加一行 converged=false 的失败行，
        并把本表挂到异常上，CLI 据此输出已完成的部分
        """
        try:
            yield
        except QuadratureBudgetError as e:
            report = e.report
            value = report.value if report is not None else math.nan
            est = report.est_error if report is not None else math.inf
            self.add(series, parameter, value, converged=False, est_error=est)
            if e.table is None:
                e.table = self
            raise

    def declare(self, series: str, direction: str, column: str = "value") -> None:
        if direction not in ("nondecreasing", "nonincreasing"):
            raise ValueError(f"未知的单调方向: {direction}")
        key = series if column == "value" else f"{series}.{column}"
        self.declared[key] = (series, direction, column)

    def series(self, name: str) -> List[TableRow]:
        return [row for row in self.rows if row.series == name]

    def values(self, name: str) -> List[float]:
        return [row.value for row in self.series(name)]

    def series_names(self) -> List[str]:
        names: List[str] = []
        for row in self.rows:
            if row.series not in names:
                names.append(row.series)
        return names

    def is_monotone(self, name: str, direction: str = "nondecreasing", column: str = "value") -> bool:
        """相邻两行的变化在两行误差估计之和以内视为满足单调"""
        rows = [row for row in self.series(name) if getattr(row, column) is not None]
        for prev, cur in zip(rows, rows[1:]):
            a, b = getattr(prev, column), getattr(cur, column)
            slack = prev.est_error + cur.est_error + MONOTONE_SLACK * max(1.0, abs(a))
            if direction == "nondecreasing" and b < a - slack:
                return False
            if direction == "nonincreasing" and b > a + slack:
                return False
        return True

    def monotone_flags(self) -> Dict[str, bool]:
        return {key: self.is_monotone(series, direction, column)
                for key, (series, direction, column) in self.declared.items()}

    @property
    def converged(self) -> bool:
        return all(row.converged for row in self.rows)

    # ---------- 序列化 ----------

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([
                row.series,
                _num(row.parameter),
                _num(row.value),
                _num(row.reference),
                _num(row.abs_error),
                "true" if row.converged else "false",
            ])
        return buffer.getvalue()

    def to_document(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "columns": list(COLUMNS),
            "rows": [
                {
                    "series": row.series,
                    "parameter": row.parameter,
                    "value": row.value,
                    "reference": row.reference,
                    "abs_error": row.abs_error,
                    "converged": row.converged,
                }
                for row in self.rows
            ],
            "monotone": self.monotone_flags(),
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), ensure_ascii=False, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"未知的输出格式: {fmt}")

    @classmethod
    def from_json(cls, text: str) -> 'ConvergenceTable':
        """JSON 文本重新解析为表（经 RowSchema 校验）"""
        document = TableDocument.model_validate(json.loads(text))
        table = cls(experiment=document.experiment, metadata=dict(document.metadata))
        for row in document.rows:
            table.rows.append(TableRow(row.series, row.parameter, row.value, row.reference,
                                       row.abs_error, row.converged))
        return table

    def write(self, path, fmt: str = "csv") -> Path:
        """原子写入：同目录临时文件 + os.replace"""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        text = self.render(fmt)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(tmp_name, target)
        except Exception:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        logger.info(f"结果表已写入: {target} ({len(self.rows)} 行)")
        return target


def _num(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return repr(float(value))
