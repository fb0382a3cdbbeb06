#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试命令行入口：配置错误、dry-run、输出格式与退出码
"""
import csv
import json
import math
from pathlib import Path

import pytest

from pshardy import main as cli
from pshardy.config.experiment_config import load_config
from pshardy.config.solver_config import DEFAULT_CONFIG, get_active_config, set_active_config
from pshardy.routes.experiments import run_experiment
from pshardy.utils.errors import QuadratureBudgetError
from pshardy.utils.tables import COLUMNS, ConvergenceTable

CONFIGS = Path(__file__).resolve().parent / "configs"


@pytest.fixture(autouse=True)
def restore_solver_config():
    yield
    set_active_config(DEFAULT_CONFIG)


def _rows(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def test_invalid_weights_rejected(capsys):
    code = cli.main(["norm", "--config", str(CONFIGS / "invalid_weights.json")])
    assert code == 1
    err = capsys.readouterr().err
    assert "CONFIG ERROR exhaustion.weights_sum" in err


def test_missing_config_file(tmp_path, capsys):
    code = cli.main(["norm", "--config", str(tmp_path / "nope.json")])
    assert code == 1
    assert "config.path" in capsys.readouterr().err


def test_unknown_experiment(capsys):
    code = cli.main(["nrom", "--config", str(CONFIGS / "norm_atom05.json"), "--dry-run"])
    assert code == 1
    captured = capsys.readouterr()
    assert "status=failed" in captured.out
    assert "experiment.unknown" in captured.err


def test_dry_run_does_not_compute(tmp_path, capsys):
    out = tmp_path / "norm.csv"
    code = cli.main(["norm", "--config", str(CONFIGS / "norm_atom05.json"), "--out", str(out), "--dry-run"])
    assert code == 0
    assert "VALIDATION experiment=norm status=ok violations=0" in capsys.readouterr().out
    assert not out.exists()


def test_nonpositive_tol_rejected(capsys):
    code = cli.main(["balls", "--config", str(CONFIGS / "balls.json"), "--tol", "0"])
    assert code == 1
    assert "tolerances.positive" in capsys.readouterr().err


def test_balls_csv(tmp_path, capsys):
    out = tmp_path / "balls.csv"
    code = cli.main(["balls", "--config", str(CONFIGS / "balls.json"), "--out", str(out)])
    assert code == 0
    assert out.read_text(encoding="utf-8").splitlines()[0] == ",".join(COLUMNS)
    rows = _rows(out)
    assert [row["series"] for row in rows] == ["ball"] * 4
    for row, expected in zip(rows, [3.0, 3.8, 3.98, 3.998]):
        assert abs(float(row["value"]) - expected) <= 1e-8
        assert row["converged"] == "true"
    summary = capsys.readouterr().out.strip().splitlines()[-1]
    assert summary.startswith("SUMMARY experiment=balls status=pass rows=4")


def test_balls_json_to_stdout(capsys):
    code = cli.main(["balls", "--config", str(CONFIGS / "balls.json"), "--format", "json"])
    assert code == 0
    out = capsys.readouterr().out
    document_text = out[:out.rindex("SUMMARY")]
    table = ConvergenceTable.from_json(document_text)
    assert table.experiment == "balls"
    assert len(table.rows) == 4
    assert json.loads(document_text)["metadata"]["first_exit"] == 0.5


def test_norm_anchor(tmp_path):
    out = tmp_path / "norm.csv"
    code = cli.main(["norm", "--config", str(CONFIGS / "norm_atom05.json"), "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    boundary = [row for row in rows if row["series"] == "boundary"]
    assert abs(float(boundary[0]["value"]) - math.sqrt(3)) <= 1e-6
    levels = [float(row["value"]) for row in rows if row["series"] == "levels"]
    assert len(levels) == 8
    assert all(b >= a - 1e-9 for a, b in zip(levels, levels[1:]))


def test_config_tolerances_reach_solver():
    config = load_config(CONFIGS / "weakstar.json")
    solver = cli.configure_solver(config)
    assert solver.contour.grid_n == 512
    assert get_active_config() is solver
    tight = cli.configure_solver(config, tol=1e-9)
    assert tight.quadrature.area_tol == 1e-9


def test_budget_error_writes_empty_table(tmp_path, monkeypatch, capsys):
    def exhausted(config):
        raise QuadratureBudgetError("预算耗尽")

    monkeypatch.setattr(cli, "run_experiment", exhausted)
    out = tmp_path / "balls.csv"
    code = cli.main(["balls", "--config", str(CONFIGS / "balls.json"), "--out", str(out)])
    assert code == 2
    assert out.read_text(encoding="utf-8") == ",".join(COLUMNS) + "\n"
    assert "status=fail rows=0 converged=false" in capsys.readouterr().out


def test_alpha_experiment_checks():
    outcome = run_experiment(load_config(CONFIGS / "alpha_quad.json"))
    assert outcome.passed
    rows = outcome.table.series("alpha")
    assert len(rows) == 5
    for row in rows:
        assert abs(row.value - row.reference) <= 1e-4 * row.value


def test_compare_experiment_ordered():
    outcome = run_experiment(load_config(CONFIGS / "compare.json"))
    assert outcome.checks == {"ordered": True}
    u_row, v_row = outcome.table.series("u")[0], outcome.table.series("v")[0]
    assert abs(u_row.value - v_row.value) <= 1e-6


def test_mu_pair_experiment_agrees():
    outcome = run_experiment(load_config(CONFIGS / "mu_pair_mixed.json"))
    assert outcome.checks == {"route_agreement": True}
    assert outcome.table.series_names() == ["lelong_jensen", "contour"]


def test_norm_single_level_skips_extrapolation(tmp_path):
    config = tmp_path / "single.json"
    config.write_text(json.dumps({
        "experiment": "norm",
        "exhaustion": {"atoms": [[0.5, 0.0, 1.0]], "name": "atom(0.5)"},
        "function": {"poly": [1.0, 1.0]},
        "p": 2.0,
        "r_seq": [-0.25],
    }), encoding="utf-8")
    out = tmp_path / "norm.csv"
    code = cli.main(["norm", "--config", str(config), "--out", str(out)])
    assert code == 0
    series = [row["series"] for row in _rows(out)]
    assert series == ["levels", "riesz", "boundary"]


def test_budget_error_keeps_completed_rows(tmp_path, monkeypatch, capsys):
    from pshardy.routes import experiments
    from pshardy.utils.quadrature import QuadratureReport

    real_contour = experiments.mu_pair_contour
    calls = []

    def contour_then_exhausted(u, r, phi, grid_n=None):
        calls.append(r)
        if len(calls) == 2:
            raise QuadratureBudgetError("等值线预算耗尽", report=QuadratureReport(1.25, 0.5, 10, False, 1e-8))
        return real_contour(u, r, phi, grid_n=grid_n)

    monkeypatch.setattr(experiments, "mu_pair_contour", contour_then_exhausted)
    out = tmp_path / "mu.csv"
    code = cli.main(["mu-pair", "--config", str(CONFIGS / "mu_pair_mixed.json"), "--out", str(out)])
    assert code == 2
    rows = _rows(out)
    assert [row["series"] for row in rows] == ["lelong_jensen", "contour", "lelong_jensen", "contour"]
    assert rows[-1]["converged"] == "false"
    assert float(rows[-1]["parameter"]) == -0.25
    assert float(rows[-1]["value"]) == 1.25
    assert "status=fail rows=4 converged=false" in capsys.readouterr().out
