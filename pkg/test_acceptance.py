#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
端到端验收：用 configs/ 中的配置跑命令行，检查结果表中的闭式锚点与收敛性质
"""
import csv
import json
import math
from pathlib import Path

import pytest

from pshardy.config.experiment_config import load_config
from pshardy.config.solver_config import DEFAULT_CONFIG, set_active_config
from pshardy.main import configure_solver, main as cli_main
from pshardy.routes.experiments import run_experiment

CONFIGS = Path(__file__).resolve().parent / "configs"


@pytest.fixture(autouse=True)
def restore_solver_config():
    yield
    set_active_config(DEFAULT_CONFIG)


def _run(experiment, config_name, out):
    return cli_main([experiment, "--config", str(CONFIGS / config_name), "--out", str(out)])


def _series(path, name):
    with open(path, encoding="utf-8", newline="") as f:
        return [row for row in csv.DictReader(f) if row["series"] == name]


def test_weakstar_limit(tmp_path):
    out = tmp_path / "weakstar.csv"
    assert _run("weakstar", "weakstar.json", out) != 1
    rows = _series(out, "weakstar")
    assert len(rows) == 10
    errors = [float(row["abs_error"]) for row in rows]
    assert all(float(row["reference"]) == pytest.approx(0.5, abs=1e-8) for row in rows)
    assert errors[-1] <= 1e-3
    assert errors[-1] < errors[0]
    for row in _series(out, "unit"):
        assert abs(float(row["value"]) - 0.5) <= 1e-5


def test_weakstar_error_shrinks_along_levels():
    """误差约为 (2/3)r²，逐行递减；相邻两行的差额允许各自的误差估计"""
    config = load_config(CONFIGS / "weakstar.json")
    configure_solver(config)
    rows = run_experiment(config).table.series("weakstar")
    for prev, cur in zip(rows, rows[1:]):
        assert cur.abs_error <= prev.abs_error + prev.est_error + cur.est_error + 1e-7
    assert rows[-1].abs_error <= 1e-2 * rows[0].abs_error


def test_dilation_limits(tmp_path):
    out = tmp_path / "dilation.csv"
    assert _run("dilation", "dilation.json", out) == 0
    for row in _series(out, "norm"):
        t = float(row["parameter"])
        assert abs(float(row["value"]) ** 2 - (1 + t + t * t)) <= 1e-6
    diffs = _series(out, "difference")
    for row in diffs:
        assert abs(float(row["value"]) - (1 - float(row["parameter"]))) <= 1e-6
    values = [float(row["value"]) for row in diffs]
    assert values == sorted(values, reverse=True)


def test_density_geometric_tail(tmp_path):
    out = tmp_path / "density.json"
    assert _run("density", "density.json", out) == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["monotone"]["section"] is True
    schedule = document["metadata"]["schedule"]
    sections = [row for row in document["rows"] if row["series"] == "section"]
    assert len(sections) == len(schedule) == 8
    for (t, n), row in zip(schedule, sections):
        q = 0.95 * t
        oracle = q ** (n + 1) / math.sqrt(1 - q * q)
        assert 0.5 <= row["value"] / oracle <= 2.0
    assert sections[-1]["value"] < 1e-3


def test_strict_inclusion_ratios(tmp_path):
    out = tmp_path / "strict.csv"
    assert _run("strict-inclusion", "strict_inclusion.json", out) != 1
    ratios = [float(row["value"]) for row in _series(out, "ratio")]
    assert len(ratios) == 12
    assert all(abs(ratio - math.sqrt(2)) <= 0.05 for ratio in ratios)
    classical = _series(out, "classical")[0]
    assert classical["converged"] == "true"
    assert math.isfinite(float(classical["value"]))


@pytest.mark.parametrize("experiment,config_name", [
    ("balls", "balls.json"),
    ("mu-pair", "mu_pair_mixed.json"),
    ("density", "density.json"),
])
def test_repeated_runs_are_byte_identical(tmp_path, experiment, config_name):
    first, second = tmp_path / "a.out", tmp_path / "b.out"
    code_a = _run(experiment, config_name, first)
    code_b = _run(experiment, config_name, second)
    assert code_a == code_b
    assert first.read_bytes() == second.read_bytes()
