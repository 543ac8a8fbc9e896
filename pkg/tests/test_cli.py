import csv
import json

import numpy as np
import pytest

from larche.cli import compare_runs, main, norm_report
from larche.grid import Grid2D

SIM = {"grid": {"n": 97}, "epsilon": 0.03, "tau": 0.0009, "end_time": 0.009,
       "init": {"kind": "glued", "shape": {"kind": "circle", "center": [0.5, 0.5], "R": 0.2},
                "delta": 0.12, "order": 1},
       "snapshot_times": [0.0045], "polylines": True}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_profile_cli(tmp_path, capsys):
    assert main(["profile", "--potential", "quartic", "-o", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "sigma,0.9428090415820801"
    rows = read_csv(tmp_path / "profile.csv")
    assert rows[0] == ["z", "theta0", "dtheta0", "theta1"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "profile" and man["thread_count"] == 1
    assert "numpy" in man["versions"]


def test_validate_potential_cli(tmp_path, capsys):
    assert main(["validate-potential", "-o", str(tmp_path)]) == 0
    assert ": pass" in capsys.readouterr().out
    bad = main(["validate-potential", "--coefficients", "1,0,-1.75,0.25,1", "-o", str(tmp_path / "b")])
    assert bad == 1
    assert main(["validate-potential", "--coefficients", "1,x", "-o", str(tmp_path / "c")]) == 2


def test_schema_errors(tmp_path):
    assert main(["simulate", "-o", str(tmp_path)]) == 2
    assert main(["simulate", str(tmp_path / "missing.json"), "-o", str(tmp_path)]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["simulate", str(tmp_path / "bad.json"), "-o", str(tmp_path)]) == 2
    assert main(["simulate", write(tmp_path, {"simulate": {**SIM, "bogus": 1}}), "-o", str(tmp_path)]) == 2
    assert main(["rates", write(tmp_path, {"simulate": SIM}), "-o", str(tmp_path)]) == 2


def test_module_error_exit(tmp_path):
    cfg = {"simulate": {**SIM, "epsilon": 0.01}}
    assert main(["simulate", write(tmp_path, cfg), "-o", str(tmp_path)]) == 1


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LARCHE_THREADS", "2")
    assert main(["profile", "-o", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["thread_count"] == 2
    monkeypatch.setenv("LARCHE_THREADS", "zero")
    assert main(["profile", "-o", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    cfg = {"seed": 3, "simulate": SIM}
    assert main(["simulate", write(d, cfg), "-o", str(d / "run")]) == 0
    return d / "run"


def test_simulate_outputs(sim_dir):
    rows = read_csv(sim_dir / "timeseries.csv")
    assert rows[0] == ["t", "mass", "E1", "E2", "Etot", "max_abs_c"]
    assert len(rows) == 12
    mass = np.array([float(r[1]) for r in rows[1:]])
    assert np.ptp(mass) < 1e-12
    run = json.loads((sim_dir / "run.json").read_text())
    assert run["frames"] == 3
    meta = json.loads((sim_dir / "frames" / "c_00002.json").read_text())
    assert meta["nx"] == 97 and meta["time"] == pytest.approx(0.009)
    assert read_csv(sim_dir / "polyline_00000.csv")[0] == ["x", "y", "nx", "ny", "kappa", "s"]


def test_residual_cli(sim_dir, tmp_path):
    cfg = {"residual": {"kind": "gibbs-thomson", "run_dir": str(sim_dir)}}
    assert main(["residual", write(tmp_path, cfg), "-o", str(tmp_path / "gt")]) == 0
    assert read_csv(tmp_path / "gt" / "residual.csv")[0] == ["s", "x", "y", "mu_meas", "kappa",
                                                             "elastic_term", "residual"]
    cfg = {"residual": {"kind": "stefan", "run_dir": str(sim_dir), "frame": 0, "frame1": 2}}
    assert main(["residual", write(tmp_path, cfg, "s.json"), "-o", str(tmp_path / "st")]) == 0
    cfg = {"residual": {"kind": "stefan", "run_dir": str(sim_dir), "frame": 2, "frame1": 0}}
    assert main(["residual", write(tmp_path, cfg, "s2.json"), "-o", str(tmp_path / "st2")]) == 1
    cfg = {"residual": {"kind": "stefan", "run_dir": str(tmp_path)}}
    assert main(["residual", write(tmp_path, cfg, "s3.json"), "-o", str(tmp_path / "st3")]) == 2


def test_compare_cli(sim_dir, tmp_path):
    cfg = {"compare": {"run_a": str(sim_dir), "run_b": str(sim_dir), "fields": ["c", "mu"]}}
    assert main(["compare", write(tmp_path, cfg), "-o", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "compare.csv")
    assert rows[0] == ["frame", "time", "field", "L2", "L3", "max"]
    assert all(float(r[5]) == 0.0 for r in rows[1:])
    assert len(compare_runs(sim_dir, sim_dir, ("c",))) == 3


def test_norm_report():
    g = Grid2D.square(11)
    r = norm_report(np.ones(g.shape), np.zeros(g.shape), g)
    assert r["L2"] == pytest.approx(1.0) and r["L3"] == pytest.approx(1.0) and r["max"] == 1.0


def test_spectral_cli(tmp_path):
    cfg = {"spectral": {"epsilons": [0.2, 0.1, 0.05], "grid": {"n": 24}, "phi": {"kind": "flat"}}}
    assert main(["spectral", write(tmp_path, cfg), "-o", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "spectral.csv")
    assert rows[0] == ["epsilon", "lambda_min", "C"] and len(rows) == 4
    rep = json.loads((tmp_path / "spectral.json").read_text())
    assert set(rep) >= {"gamma1", "ratio", "passed", "rows"}
    cfg["spectral"]["epsilons"] = [0.1, 0.05]
    assert main(["spectral", write(tmp_path, cfg, "b.json"), "-o", str(tmp_path / "b")]) == 1


def test_rates_cli_without_simulation(tmp_path, capsys):
    cfg = {"rates": {"epsilons": [0.08, 0.04, 0.02], "delta": 0.32, "simulate": False}}
    assert main(["rates", write(tmp_path, cfg), "-o", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["order"] > 0.8
    rows = read_csv(tmp_path / "rates.csv")
    assert rows[0] == ["epsilon", "norm_rA", "norm_sA", "norm_mass", "err_mu", "err_c"]
    rep = json.loads((tmp_path / "rates.json").read_text())
    assert rep["orders"]["err_mu"] is None
