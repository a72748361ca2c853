import io
import json

import numpy as np
import pytest

from ffmisinfo.cli import main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def cfg_path(tmp_path):
    doc = {"params": {"beta": 0.7, "sigma": 0.1, "nu": 0.1, "gamma1": 0.05, "gamma2": 0.05,
                      "gamma3": 0.05, "gamma4": 0.05, "tau1": 0.05},
           "grid": {"h": 0.05, "t_end": 20},
           "outputs": {"csv_path": "out.csv", "svg_path": "out.svg", "report_path": "out.json"}}
    path = tmp_path / "default.cfg"
    path.write_text(json.dumps(doc))
    return path


def test_r0_at_threshold(cfg_path):
    code, out, _ = run(["r0", "--config", str(cfg_path)])
    assert code == 0
    assert "R0 = 1.0\n" in out


def test_missing_config_flag_is_usage_error():
    code, _, err = run(["simulate"])
    assert code == 2 and "--config" in err


def test_unknown_subcommand_and_flag():
    assert run(["explode", "--config", "x"])[0] == 2
    assert run(["r0", "--config", "x", "--bogus"])[0] == 2


def test_missing_config_file_is_usage_error(tmp_path):
    code, _, err = run(["r0", "--config", str(tmp_path / "none.json")])
    assert code == 2 and "not found" in err


def test_invalid_config_is_usage_error(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"alpha": 1.5}))
    code, _, err = run(["r0", "--config", str(p)])
    assert code == 2 and "alpha must lie in (0,1]" in err


def test_simulate_writes_outputs(cfg_path, tmp_path):
    code, out, _ = run(["simulate", "--config", str(cfg_path)])
    assert code == 0, out
    csv = (tmp_path / "out.csv").read_text().splitlines()
    assert csv[0] == "t,S_p,I,I_p,I_n,I_c,R,D,N" and len(csv) == 402
    assert (tmp_path / "out.svg").read_text().count("<polyline") == 7
    rep = json.loads((tmp_path / "out.json").read_text())
    assert rep["scheme"]["n_steps"] == 400


def test_simulate_overrides(cfg_path, tmp_path):
    code, _, _ = run(["simulate", "--config", str(cfg_path), "--kernel", "ffm", "--alpha", "0.9",
                      "--eta", "0.95", "--h", "0.1", "--t-end", "5",
                      "--csv", str(tmp_path / "o.csv"), "--report", str(tmp_path / "o.json")])
    assert code == 0
    rep = json.loads((tmp_path / "o.json").read_text())
    assert rep["scheme"]["kernel"] == "FFM" and rep["scheme"]["alpha"] == 0.9
    assert len((tmp_path / "o.csv").read_text().splitlines()) == 52


def test_simulate_bad_override_is_usage_error(cfg_path):
    assert run(["simulate", "--config", str(cfg_path), "--alpha", "3"])[0] == 2


def test_simulate_is_reproducible(cfg_path, tmp_path):
    for tag in ("a", "b"):
        run(["simulate", "--config", str(cfg_path), "--kernel", "ffp", "--alpha", "0.8",
             "--csv", str(tmp_path / f"{tag}.csv"), "--svg", str(tmp_path / f"{tag}.svg")])
    for ext in ("csv", "svg"):
        assert (tmp_path / f"a.{ext}").read_bytes() == (tmp_path / f"b.{ext}").read_bytes()


def test_equilibria_and_stability(cfg_path):
    code, out, _ = run(["equilibria", "--config", str(cfg_path)])
    assert code == 0
    assert "equilibria.disease_free.point.S_p = 5.0" in out
    assert "equilibria.endemic.error = NoEndemicEquilibrium" in out
    code, out, _ = run(["stability", "--config", str(cfg_path)])
    assert code == 0 and out.startswith("classification = ")
    assert out.count("eigenvalue[") == 7


def test_bounds_zero_violations(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"grid": {"h": 0.01, "t_end": 100}}))
    code, out, _ = run(["bounds", "--config", str(p), "--out", str(tmp_path / "b.csv")])
    assert code == 0
    assert "violations.total = 0" in out
    header = (tmp_path / "b.csv").read_text().splitlines()[0]
    assert header.endswith("D_bound")


def test_lyapunov_columns(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"grid": {"h": 0.1, "t_end": 2}}))
    code, out, _ = run(["lyapunov", "--config", str(p)])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].endswith("L,dL_dt,d2L_dt2") and len(lines) == 22


def test_lyapunov_without_endemic_point_is_computation_error(cfg_path):
    code, _, err = run(["lyapunov", "--config", str(cfg_path)])
    assert code == 1 and "no endemic equilibrium" in err


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_sweep_over_beta(cfg_path, jobs):
    code, out, _ = run(["sweep", "--config", str(cfg_path), "--param", "beta", "--from", "0.1",
                        "--to", "1.0", "--steps", "10", "--jobs", jobs, "--t-end", "5"])
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert len(rows) == 10
    r0 = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(r0) > 0)
    # the stability class flips exactly where R0 crosses 1
    for r, cls in zip(r0, (row[4] for row in rows)):
        assert (cls == "Unstable") == (r >= 1.0)


def test_computation_error_exit_code(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"params": {"nu": 0.0}}))
    code, _, err = run(["equilibria", "--config", str(p)])
    assert code == 0  # reported as inapplicable in the structured output
    code, _, err = run(["stability", "--config", str(p)])
    assert code == 1 and "nu > 0" in err
