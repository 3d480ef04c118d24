import json

import pytest

from hyperwave.cli import dispatch
from hyperwave.reports import load_report


def run(tmp_path, *argv):
    out = tmp_path / "r.json"
    code = dispatch([*argv, "--out", str(out)])
    return code, (load_report(out) if out.exists() else None), out


def test_exponents_table(tmp_path):
    code, rep, _ = run(tmp_path, "exponents", "--n", "3")
    assert code == 0
    assert rep["p_strauss"] == pytest.approx(2.414213562373095, abs=1e-12)
    assert rep["p_conformal"] == 3 and rep["p_fujita"] == pytest.approx(5 / 3)
    assert rep["schema_version"] == 1 and len(rep["input_hash"]) == 64


def test_verify_kernels_zero_order(tmp_path):
    code, rep, out = run(tmp_path, "verify", "kernels", "--imz-list", "0", "--n-t", "3",
                         "--n-r", "20")
    assert code == 0 and rep["sup"] == 0 and rep["verdict"]
    rows = out.with_suffix(".csv").read_text().strip().splitlines()
    assert len(rows) - 1 == len(rep["grid"])


def test_simulate_defocusing(tmp_path):
    code, rep, _ = run(tmp_path, "simulate", "--p", "3", "--sign", "-1", "--eps", "0.1",
                       "--T", "50")
    assert code == 0 and rep["outcome"] == "global_to_T"
    assert rep["config"]["T"] == 50.0 and rep["series"]["t"][-1] == pytest.approx(50.0)


def test_config_and_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eps": 0.2, "T": 5.0, "sign": -1}))
    code, rep, _ = run(tmp_path, "simulate", "--config", str(cfg), "--T", "2")
    assert code == 0
    assert rep["config"]["eps"] == 0.2 and rep["config"]["T"] == 2.0 and rep["config"]["sign"] == -1


def test_deterministic_output(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for p in (a, b):
        assert dispatch(["picard", "--m-max", "2", "--T-x", "10", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(tmp_path, capsys):
    assert dispatch(["bogus"]) == 2
    assert dispatch(["simulate", "--dt", "1"]) == 2
    assert "exceeds" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert dispatch(["simulate", "--config", str(bad)]) == 2
    assert dispatch(["verify", "bridge", "--scheme", "n3"]) == 2


def test_fail_verdict_exit_code(tmp_path):
    code, rep, _ = run(tmp_path, "picard", "--p", "3", "--eps", "20", "--T-x", "10")
    assert code == 1 and rep["diverged"]


def test_kernel_eval_and_threshold(tmp_path, capsys):
    assert dispatch(["kernel-eval", "--z=-1+0j", "--r", "1,2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["series"]["re"] == [0.0, 0.0]
    code, rep, _ = run(tmp_path, "threshold", "--T", "2", "--eps-lo", "1", "--eps-hi", "50",
                       "--rel-gap", "0.05")
    assert code == 0 and rep["status"] == "bracketed" and rep["rel_gap"] <= 0.05


def test_verify_decay_and_hamiltonian(tmp_path):
    code, rep, _ = run(tmp_path, "verify", "decay", "--N", "4096", "--tau-max", "10")
    assert code == 0 and rep["verdict"]
    code, rep, _ = run(tmp_path, "verify", "hamiltonian", "--T", "10", "--R", "40", "--dt", "0.008")
    assert code == 0 and rep["details"]["energy_inequality"]
