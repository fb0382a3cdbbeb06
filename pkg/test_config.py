#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试求解配置与实验配置校验
"""
import pytest

from pshardy.config.experiment_config import (
    ExperimentConfig,
    load_config,
    parse_config_text,
    validate,
)
from pshardy.config.solver_config import (
    DEFAULT_CONFIG,
    SolverConfig,
    get_config_for_preset,
)
from pshardy.utils.errors import ConfigError
from pshardy.utils.exhaustion import Exhaustion, ExhaustionSeries


def _norm_document(**extra):
    document = {
        "experiment": "norm",
        "exhaustion": {"atoms": [[0.5, 0.0, 1.0]]},
        "function": {"poly": [1.0, 1.0]},
        "p": 2.0,
    }
    document.update(extra)
    return document


def test_load_from_env(monkeypatch):
    monkeypatch.setenv("PSHARDY_PERIODIC_TOL", "1e-10")
    monkeypatch.setenv("PSHARDY_GRID_N", "256")
    monkeypatch.setenv("PSHARDY_CONTOUR_RULE", "MIDPOINT")
    monkeypatch.setenv("PSHARDY_MAX_WORKERS", "2")
    config = SolverConfig.load_from_env()
    assert config.quadrature.periodic_tol == 1e-10
    assert config.contour.grid_n == 256
    assert config.contour.rule == "midpoint"
    assert config.experiment.max_workers == 2


def test_unknown_contour_rule_falls_back(monkeypatch):
    monkeypatch.setenv("PSHARDY_CONTOUR_RULE", "spline")
    assert SolverConfig.load_from_env().contour.rule == "curved"


def test_presets():
    assert get_config_for_preset("fast").contour.grid_n == 256
    assert get_config_for_preset("accurate").quadrature.area_tol == 1e-8
    assert get_config_for_preset("nonexistent") is DEFAULT_CONFIG


def test_with_tolerance_and_overrides():
    base = SolverConfig()
    tight = base.with_tolerance(1e-10)
    assert tight.quadrature.area_tol == 1e-10
    assert tight.quadrature.periodic_tol == 1e-10
    assert tight.contour.tol == 1e-10
    loose = base.with_tolerance(1e-3)
    assert loose.quadrature.periodic_tol == base.quadrature.periodic_tol

    custom = base.with_overrides(area_tol=1e-7, grid_n=128)
    assert custom.quadrature.area_tol == 1e-7
    assert custom.contour.grid_n == 128
    assert custom.quadrature.periodic_tol == base.quadrature.periodic_tol
    assert base.contour.grid_n == 512
    assert custom.to_dict()["contour"]["grid_n"] == 128


def test_valid_document():
    report = validate(_norm_document(r_seq=[-0.5, -0.25, -0.001]))
    assert report.ok
    assert isinstance(report.config, ExperimentConfig)
    u = report.config.exhaustion.build()
    assert isinstance(u, Exhaustion)
    assert u.poles == (0.5 + 0j,)
    f = report.config.function.build()
    assert f.degree == 1


def test_weights_must_sum_to_one():
    document = _norm_document(exhaustion={"atoms": [[0.0, 0.0, 0.5], [0.5, 0.0, 0.4]]})
    report = validate(document)
    assert "exhaustion.weights_sum" in report.names()
    with pytest.raises(ConfigError) as excinfo:
        report.raise_if_failed()
    assert [v.name for v in excinfo.value.violations] == ["exhaustion.weights_sum"]


def test_sequence_checks():
    report = validate(_norm_document(r_seq=[-0.5, -0.1, -0.3]))
    assert "r_seq.monotone" in report.names()
    report = validate(_norm_document(r_seq=[-0.5, 0.1]))
    assert "r_seq.negative" in report.names()
    report = validate({"experiment": "dilation", "exhaustion": {"atoms": [[0, 0, 1]]},
                       "function": {"poly": [1, 1]}, "t_seq": [0.5, 1.0]})
    assert report.names() == ["t_seq.range"]


def test_unknown_experiment_suggests_candidates():
    report = validate(_norm_document(experiment="nrom"))
    assert report.names() == ["experiment.unknown"]
    assert "norm" in report.violations[0].suggestions
    assert "norm" in str(report.violations[0])


def test_experiment_name_from_command_line():
    document = _norm_document()
    del document["experiment"]
    assert validate(document, experiment="norm").ok
    report = validate(_norm_document(), experiment="alpha")
    assert "experiment.mismatch" in report.names()


def test_missing_required_field():
    report = validate({"experiment": "compare", "exhaustion": {"atoms": [[0, 0, 1]]},
                       "function": {"poly": [1]}})
    assert report.names() == ["compare_with.required"]


def test_type_errors_become_violations():
    report = validate(_norm_document(p="two"))
    assert not report.ok
    assert report.names()[0].startswith("config.p")


def test_series_only_for_strict_inclusion():
    series = {"series": {"kind": "boundary_witness"}}
    assert "exhaustion.series" in validate(_norm_document(exhaustion=series)).names()
    report = validate({"experiment": "strict-inclusion", "exhaustion": series,
                       "function": {"factors": [[1.0, 0.0, 0.375]]}, "k_seq": list(range(8, 21))})
    assert report.ok
    assert isinstance(report.config.exhaustion.build(), ExhaustionSeries)


def test_tolerance_and_format_checks():
    report = validate(_norm_document(tolerances={"area": -1.0, "preset": "fastest"}, format="xml"))
    names = report.names()
    assert "tolerances.positive" in names
    assert "tolerances.preset" in names
    assert "format.choice" in names


def test_bad_json_text():
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text("{not json")
    assert excinfo.value.violations[0].name == "config.json"
    with pytest.raises(ConfigError):
        parse_config_text("[1, 2]")


def test_load_config_from_file(tmp_path):
    path = tmp_path / "norm.json"
    path.write_text('{"experiment": "norm", "exhaustion": {"quad_weight": 1.0}, "function": {"poly": [1, 1]}}',
                    encoding="utf-8")
    config = load_config(path)
    assert config.exhaustion.build().quad_weight == 1.0
    with pytest.raises(ConfigError) as excinfo:
        load_config(tmp_path / "missing.json")
    assert excinfo.value.violations[0].name == "config.path"
