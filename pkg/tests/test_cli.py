import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from qosmenu.cli import main

CONFIG = {
    "params": {"a": 0.47, "sigma": 0.16, "q_bar": 5.0},
    "dist": {"kind": "exponential", "rate": 0.952,
             "support": [0.0, 4.0], "renormalize": False},
}


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def config_file(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(CONFIG))
    return p


def test_solve_writes_artifacts(runner, config_file, tmp_path):
    out = tmp_path / "run"
    r = runner.invoke(main, ["solve", "--config", str(config_file),
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    assert (out / "menu.csv").exists()
    assert (out / "menu.meta.json").exists()
    report = json.loads((out / "verification.json").read_text())
    assert report["max_ic_regret"] <= 1e-6
    meta = json.loads((out / "menu.meta.json").read_text())
    assert meta["beta"] == pytest.approx(1.2095564588, abs=1e-6)


def test_solve_is_byte_stable(runner, config_file, tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        r = runner.invoke(main, ["solve", "--config", str(config_file),
                                 "--out", str(out)])
        assert r.exit_code == 0
        outs.append((out / "menu.csv").read_bytes())
    assert outs[0] == outs[1]


def test_flag_overrides_config(runner, config_file, tmp_path):
    out = tmp_path / "run"
    r = runner.invoke(main, ["solve", "--config", str(config_file),
                             "--a", "0.51", "--out", str(out)])
    assert r.exit_code == 0
    meta = json.loads((out / "menu.meta.json").read_text())
    assert meta["beta"] == pytest.approx(1.4279, abs=1e-3)


def test_verify_round_trip(runner, config_file, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["solve", "--config", str(config_file),
                         "--out", str(out)])
    r = runner.invoke(main, ["verify", "--config", str(config_file),
                             "--menu", str(out / "menu.csv"),
                             "--out", str(tmp_path / "v")])
    assert r.exit_code == 0, r.output


def test_benchmark_information_cost(runner, config_file, tmp_path):
    out = tmp_path / "b"
    r = runner.invoke(main, ["benchmark", "--config", str(config_file),
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    meta = json.loads((out / "benchmark.meta.json").read_text())
    assert meta["information_cost"] >= 0.0


def test_oracle_small(runner, config_file, tmp_path):
    r = runner.invoke(main, ["oracle", "--config", str(config_file),
                             "--m", "64", "--trials", "50",
                             "--out", str(tmp_path / "o")])
    assert r.exit_code == 0, r.output
    rep = json.loads(r.output)
    assert abs(rep["relative_gap"]) < 0.05


def test_simulate_json(runner, config_file, tmp_path):
    r = runner.invoke(main, ["simulate", "--config", str(config_file),
                             "--users", "20000", "--seed", "4",
                             "--out", str(tmp_path / "s")])
    assert r.exit_code == 0, r.output
    out = json.loads(r.output)
    assert out["truthfulness_rate"] >= 0.99


def test_sweep_csv(runner, config_file, tmp_path):
    out = tmp_path / "sweep"
    r = runner.invoke(main, ["sweep", "--config", str(config_file),
                             "--parameter", "a", "--values", "0.47,0.49",
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "param_value,delta,q,p,U"
    vals = {line.split(",")[0] for line in lines[1:]}
    assert vals == {"0.47", "0.49"}


def test_fit_dist_command(runner, tmp_path):
    import importlib.resources as res
    with res.as_file(res.files("qosmenu") / "data"
                     / "vr_spending_histogram.csv") as p:
        r = runner.invoke(main, ["fit-dist", "--histogram", str(p)])
    assert r.exit_code == 0, r.output
    spec = json.loads(r.output)
    assert spec["rate"] == pytest.approx(0.952, abs=5e-4)


def test_report_renders_figures(runner, config_file, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["solve", "--config", str(config_file),
                         "--out", str(out)])
    rep = tmp_path / "rep"
    r = runner.invoke(main, ["report", "--config", str(config_file),
                             "--menu", str(out / "menu.csv"),
                             "--out", str(rep)])
    assert r.exit_code == 0, r.output
    for name in ("menu_vr.csv", "report.meta.json", "menu_q.png",
                 "menu_p.png", "vr_metrics.png"):
        assert (rep / name).exists()


def test_report_no_figures(runner, config_file, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["solve", "--config", str(config_file),
                         "--out", str(out)])
    rep = tmp_path / "rep"
    r = runner.invoke(main, ["report", "--config", str(config_file),
                             "--menu", str(out / "menu.csv"),
                             "--no-figures", "--out", str(rep)])
    assert r.exit_code == 0, r.output
    assert (rep / "menu_vr.csv").exists()
    assert not (rep / "menu_q.png").exists()


def test_bad_config_exit_code(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    r = runner.invoke(main, ["solve", "--config", str(bad)])
    assert r.exit_code == 1


def test_missing_menu_exit_code(runner, config_file, tmp_path):
    r = runner.invoke(main, ["verify", "--config", str(config_file),
                             "--menu", str(tmp_path / "nope.csv")])
    assert r.exit_code == 2


def test_infeasible_exit_code(runner, tmp_path):
    cfg = {"params": {"a": 0.47, "sigma": 0.16, "q_bar": 5.0},
           "dist": {"kind": "uniform", "support": [0.0, 4.0]}}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    r = runner.invoke(main, ["solve", "--config", str(p),
                             "--out", str(tmp_path / "o")])
    assert r.exit_code == 2
