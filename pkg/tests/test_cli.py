import json

import numpy as np
import pytest

from wmlsim.cli import main
from wmlsim.experiments import (
    ExperimentConfig,
    parse_csv,
    run,
    run_verify,
    to_csv,
    to_json,
)
from wmlsim.wml import m_operator


def test_verify_passes(capsys):
    assert main(["verify", "--d", "2"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10


def test_verify_detects_corrupted_m():
    m = m_operator(2)
    m[0, 1] += 1e-3
    result = run_verify(ExperimentConfig("verify", d=2), m=m)
    assert result.exit_status == 1
    assert any("M^2" in f for f in result.failures)


def test_verify_rejects_d4(capsys):
    assert main(["verify", "--d", "4"]) == 2
    assert "verify supports" in capsys.readouterr().err


def test_scaling_rows():
    res = run(ExperimentConfig("scaling", d=2, t=1.0, n_grid=[1024, 32, 128], seed=3))
    assert res.exit_status == 0
    assert [r["n"] for r in res.rows] == [32, 128, 1024]
    for r in res.rows:
        assert r["lemma1_valid"] == (r["n"] > 4)
        assert r["err_choi_lower"] <= r["bound_lemma1"]
        assert r["err_choi_lower"] <= r["err_ascent_lower"] + 1e-12 <= r["err_choi_upper"] + 2e-12
        assert {"command", "seed", "software_version", "timestamp", "config_hash", "method"} <= set(r)
    assert -1.2 <= res.summary[2]["loglog_slope"] <= -0.8


def test_scaling_trivial_row():
    res = run(ExperimentConfig("scaling", d=2, t=0.0, n_grid=[1]))
    row = res.rows[0]
    assert row["err_maxent"] == row["err_choi_lower"] == row["err_choi_upper"] == 0


def test_typical_summary():
    res = run(ExperimentConfig("typical", d_list=[64], trials=100, delta=0.5, eps=[0.1], seed=1))
    assert res.exit_status == 0
    assert res.summary[64]["fraction_within_typical"] >= 0.5
    assert res.rows[0]["typical_upper"] == pytest.approx(7 * (1 + np.log(4) / 64) * 10)


def _strip(text):
    return to_csv(parse_csv(text), exclude=("timestamp",))


def test_typical_deterministic_across_workers(tmp_path):
    outs = []
    for workers in ("1", "1", "4"):
        path = tmp_path / f"typ{len(outs)}.csv"
        args = ["typical", "--d-list", "8,16", "--trials", "20", "--seed", "5", "--workers", workers, "--out", str(path)]
        assert main(args) == 0
        outs.append(_strip(path.read_text()))
    assert outs[0] == outs[1] == outs[2]


def test_worstcase_rows():
    res = run(ExperimentConfig("worstcase", d_list=[2, 3, 32], t=1.0, n_grid=[64, 1024], eps=[1e-3]))
    assert res.exit_status == 0
    for r in res.rows:
        assert (r["z_sim_dev"] is None) == (r["d"] > 3)
        if r["z_sim_dev"] is not None:
            assert r["z_sim_dev"] <= 1e-10
    row = next(r for r in res.rows if r["d"] == 2 and r["n"] == 1024)
    assert row["n_tdist_lb"] == pytest.approx(0.125, rel=0.1)
    assert res.summary[(32, 1e-3)]["n_eps"] >= 1000


def test_bounds_table(capsys):
    assert main(["bounds", "--d-list", "2,32", "--t", "1", "--eps", "0.1", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["new_upper"] == pytest.approx(8.75) and rows[0]["old_upper"] == pytest.approx(120)
    assert rows[1]["worst_lower"] == pytest.approx(10)
    assert rows[0]["general_lower_valid"] is False


def test_csv_json_identical_values():
    res = run(ExperimentConfig("worstcase", d_list=[2, 8], n_grid=[16, 64]))
    from_csv = parse_csv(to_csv(res.rows))
    from_json = json.loads(to_json(res.rows))
    assert from_csv == from_json


def test_csv_float_format():
    text = to_csv([{"x": 0.1, "b": True, "n": 3, "z": None}])
    assert text.splitlines()[1] == "1.0000000000000001e-01,true,3,"


def test_config_file_and_precedence(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d_list": [2], "eps": 0.2, "t": 2.0, "seed": 9}))
    monkeypatch.setenv("WMLSIM_SEED", "77")
    assert main(["bounds", "--config", str(cfg), "--t", "1", "--format", "json"]) == 0
    row = json.loads(capsys.readouterr().out)[0]
    assert row["t"] == 1.0 and row["eps"] == 0.2 and row["seed"] == 9
    assert main(["bounds", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["seed"] == 77


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--eps", "1.5"],
        ["scaling", "--d", "1"],
        ["typical", "--trials", "0"],
        ["bounds", "--delta", "abc"],
        ["nonsense"],
        ["bounds", "--config", "/nonexistent.json"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_bad_env_seed(monkeypatch):
    monkeypatch.setenv("WMLSIM_SEED", "x")
    assert main(["bounds"]) == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "wmlsim", "bounds", "--d", "4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("command,seed")
