import csv
import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from monitored_sps.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, build_id, main
from monitored_sps.config import (
    OUTDIR_ENV,
    Config,
    RegimeWarning,
    from_dict,
    parse_config,
    regime_violations,
)
from monitored_sps.dynamics import ModelParams
from monitored_sps.errors import ConfigError
from monitored_sps.experiment import DEFAULT_H_GRID, EFFICIENCY_CASES


@pytest.fixture(autouse=True)
def _no_env_outdir(monkeypatch):
    monkeypatch.delenv(OUTDIR_ENV, raising=False)


def write_ini(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_empty_config_gives_defaults(tmp_path):
    cfg = parse_config(write_ini(tmp_path, ""))
    m = cfg.model
    assert (m.g, m.Gamma, m.kappa, m.gamma, m.eta, m.Omega) == (0.1, 0.001, 1.0, 1.0, 1.0, 0.1)
    assert cfg.run.epsilon == 0.01
    assert cfg == Config()


def test_file_values_and_case_sensitive_keys(tmp_path):
    cfg = parse_config(write_ini(tmp_path, """
[model]
Gamma = 0.002
gamma = 0.5
[run]
t_tail = 400
controller = cusum
[sweep]
omega = 0.01, 0.02
cases = efficiency
h_grid = 0.5, 1, 2
"""))
    assert cfg.model.Gamma == 0.002 and cfg.model.gamma == 0.5
    assert cfg.run.t_tail == 400.0 and cfg.run.controller == "cusum"
    assert cfg.sweep.omega == (0.01, 0.02)
    assert cfg.sweep.cases == EFFICIENCY_CASES
    assert cfg.sweep.h_grid == (0.5, 1.0, 2.0)


def test_eta_out_of_range():
    with pytest.raises(ConfigError) as info:
        parse_config(overrides={"model.eta": "1.5"})
    assert info.value.key == "model"


@pytest.mark.parametrize("key", ["model.chi", "runs.seed", "run.seeds"])
def test_unknown_keys_rejected(key):
    with pytest.raises(ConfigError):
        parse_config(overrides={key: "1"})


@pytest.mark.parametrize("key, value", [("run.n_traj", "ten"), ("run.n_traj", "2.5"),
                                        ("sweep.cases", "cusum:1"), ("sweep.omega", ""),
                                        ("run.controller", "pid"), ("sweep.t_spacing", "0")])
def test_bad_values_rejected(key, value):
    with pytest.raises(ConfigError):
        parse_config(overrides={key: value})


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        cfg = parse_config(overrides={"model.Gamma": "0.5", "model.Omega": "0.1"})
    assert cfg.model.Gamma == 0.5
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_config()


def test_regime_rules():
    assert regime_violations(ModelParams()) == []
    assert len(regime_violations(ModelParams(gamma=0.05))) == 1
    assert len(regime_violations(ModelParams(gamma=2.0))) == 1


def test_malformed_ini(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(write_ini(tmp_path, "no section header\n"))


def test_flags_override_file_and_env(tmp_path, monkeypatch):
    path = write_ini(tmp_path, "[run]\nseed = 3\n[output]\ndir = from_file\n")
    monkeypatch.setenv(OUTDIR_ENV, "from_env")
    cfg = parse_config(path, {"run.seed": 9})
    assert cfg.run.seed == 9 and cfg.output.dir == "from_env"
    assert parse_config(path, {"output.dir": "flag"}).output.dir == "flag"


def test_round_trip_through_json():
    cfg = parse_config(overrides={"model.gamma": "0.3", "run.t_tail": "250",
                                  "sweep.cases": "cusum:2:0.5, deterministic:1:0"})
    again = from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@given(st.floats(0.0, 10.0), st.floats(0.0, 1.0), st.integers(0, 2**63 - 1),
       st.lists(st.floats(0.001, 100.0), min_size=1, max_size=5))
def test_round_trip_property(gamma, eta, seed, hs):
    cfg = from_dict({"model": {"gamma": gamma, "eta": eta}, "run": {"seed": seed},
                     "sweep": {"h_grid": hs}}, warn=False)
    assert from_dict(json.loads(json.dumps(cfg.to_dict())), warn=False) == cfg


def test_default_h_grid_keyword():
    assert parse_config(overrides={"sweep.h_grid": "default"}).sweep.h_grid == DEFAULT_H_GRID


def test_build_id_is_stable():
    assert build_id() == build_id() and len(build_id()) == 12


# -- subcommands -------------------------------------------------------------------


def test_deterministic_command(tmp_path):
    out = tmp_path / "out"
    assert main(["deterministic", "--outdir", str(out), "--set", "model.gamma=0.1",
                 "--set", "run.t_max=40"]) == EXIT_OK
    rows = read_rows(out / "deterministic.csv")
    best = max(rows, key=lambda r: float(r["p1"]))
    assert float(best["t"]) == pytest.approx(19.5, abs=1.0)
    assert float(best["p1"]) == pytest.approx(0.73, abs=0.02)
    summary = json.loads((out / "deterministic.json").read_text())
    assert summary["build_id"] == build_id()
    assert summary["results"]["constrained"]["t_stop"] == pytest.approx(8.0, abs=1.0)
    assert from_dict(summary["config"]) == parse_config(
        overrides={"output.dir": str(out), "model.gamma": "0.1", "run.t_max": "40"})


def test_csv_uses_full_precision(tmp_path):
    main(["deterministic", "--outdir", str(tmp_path), "--set", "run.t_max=2"])
    row = read_rows(tmp_path / "deterministic.csv")[5]
    assert len(row["p1"].replace("0.", "").lstrip("0")) >= 15


def test_montecarlo_timer_command(tmp_path):
    assert main(["montecarlo", "--controller", "timer", "--t-stop", "8", "--n-traj", "300",
                 "--outdir", str(tmp_path)]) == EXIT_OK
    (row,) = read_rows(tmp_path / "montecarlo.csv")
    assert abs(float(row["p1"]) - 0.53) <= 2 * float(row["se_p1"])
    assert row["controller"] == "timer" and row["n_traj"] == "300"


@pytest.mark.filterwarnings("ignore::monitored_sps.config.RegimeWarning")
def test_trajectory_and_optimize_commands(tmp_path):
    assert main(["trajectory", "--controller", "cusum", "--h", "3", "--outdir", str(tmp_path),
                 "--n-traj", "4"]) == EXIT_OK
    rec = read_rows(tmp_path / "trajectory.csv")
    assert list(rec[0]) == ["t", "y", "expect_PX", "pump_on"]
    assert rec[-1]["pump_on"] == "0"
    assert main(["optimize-h", "--n-traj", "8", "--outdir", str(tmp_path),
                 "--set", "sweep.h_grid=1,2,4", "--set", "model.gamma=10"]) == EXIT_OK
    assert len(read_rows(tmp_path / "optimize_h.csv")) == 3
    best = json.loads((tmp_path / "optimize_h.json").read_text())["results"]["best"]
    assert best["controller"] == "cusum"


def test_sweep_and_plot(tmp_path):
    assert main(["sweep", "--n-traj", "8", "--outdir", str(tmp_path),
                 "--set", "sweep.omega=0.05,0.1", "--set", "sweep.cases=deterministic:1:0,bayes:10:1"
                 ]) == EXIT_OK
    rows = read_rows(tmp_path / "sweep.csv")
    assert [r["controller"] for r in rows] == ["deterministic", "bayes"] * 2
    assert main(["plot", str(tmp_path / "sweep.csv"), "--outdir", str(tmp_path)]) == EXIT_OK
    svg = (tmp_path / "sweep.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_plot_empty_csv(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("")
    assert main(["plot", str(src), "--outdir", str(tmp_path)]) == EXIT_IO
    assert not (tmp_path / "empty.svg").exists()


def test_plot_missing_file(tmp_path):
    assert main(["plot", str(tmp_path / "nope.csv"), "--outdir", str(tmp_path)]) == EXIT_IO


def test_config_error_exit_code(tmp_path):
    assert main(["montecarlo", "--set", "model.eta=1.5", "--outdir", str(tmp_path)]) == EXIT_CONFIG
    assert main(["montecarlo", "--set", "bogus", "--outdir", str(tmp_path)]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path):
    code = main(["montecarlo", "--controller", "cusum", "--set", "model.eta=0",
                 "--n-traj", "2", "--outdir", str(tmp_path)])
    assert code == 3


def test_env_outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "env"))
    assert main(["deterministic", "--set", "run.t_max=1"]) == EXIT_OK
    assert (tmp_path / "env" / "deterministic.csv").exists()


def test_unwritable_outdir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["deterministic", "--outdir", str(blocker / "sub")]) == EXIT_IO


def test_identical_runs_give_identical_csv(tmp_path):
    args = ["montecarlo", "--controller", "cusum", "--h", "2", "--n-traj", "10", "--seed", "5"]
    main(args + ["--outdir", str(tmp_path / "a")])
    main(args + ["--outdir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "montecarlo.csv").read_bytes() == \
        (tmp_path / "b" / "montecarlo.csv").read_bytes()
    assert (tmp_path / "a" / "montecarlo.json").read_text().replace(str(tmp_path / "a"), "") == \
        (tmp_path / "b" / "montecarlo.json").read_text().replace(str(tmp_path / "b"), "")
