import json
import os
import subprocess
import sys

import pytest

from weaksing.cli import main


def run(argv, capsys=None):
    code = main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_check_satisfied(capsys, tmp_path):
    code, out = run(["check", "--lambda", "1/2", "--weight", "35,-37", "--json", "--out", str(tmp_path)], capsys)
    assert code == 0
    d = json.loads(out.out)
    cor1 = next(r for r in d["reports"] if r["name"] == "cor1")
    assert cor1["satisfied"] and cor1["exact"] == "1/36"
    assert json.loads((tmp_path / "check.json").read_text()) == d


def test_check_not_satisfied(capsys):
    code, out = run(["check", "--lambda", "1/2", "--weight", "1,-3"], capsys)
    assert code == 3
    assert "cor1" in out.out


@pytest.mark.parametrize("argv", [
    ["check", "--lambda", "1/2", "--weight", "{not json"],
    ["check", "--lambda", "3/2", "--weight", "35,-37"],
    ["check", "--lambda", "x", "--weight", "35,-37"],
    ["check", "--weight", "35,-37"],
    ["check", "--lambda", "1/2", "--weight", "35,-37", "--n-grid", "4"],
])
def test_config_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_malformed_weight_file(tmp_path, capsys):
    p = tmp_path / "w.json"
    p.write_text('{"kind": "piecewise_constant", "period": 1, "breakpoints": [0], "values": []}')
    assert run(["check", "--lambda", "1/2", "--weight", str(p)], capsys)[0] == 2
    p.write_text("garbage")
    assert run(["check", "--lambda", "1/2", "--weight", str(p)], capsys)[0] == 2


def test_solve_two_value(tmp_path, capsys):
    code, out = run(["solve", "--lambda", "1/2", "--weight", "35,-37", "--cross-check",
                     "--out", str(tmp_path), "--json"], capsys)
    assert code == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["solver"] == "timemap"
    assert s["residual"] <= 1e-6 and max(s["periodicity_defect"]) <= 1e-8
    assert s["cross_check_discrepancy"] <= 1e-6
    assert (tmp_path / "solution.csv").read_text().splitlines()[0] == "t,u,du"


def test_solve_refuses_without_force(capsys):
    assert run(["solve", "--lambda", "1/2", "--weight", "1,-3"], capsys)[0] == 3


def test_solve_forced_failure_exit4(capsys):
    # mean far below the balance: no positive periodic solution is found
    code, out = run(["solve", "--lambda", "1/2", "--weight", "1,-300", "--force"], capsys)
    assert code == 4
    assert out.err.split(":")[0] in {"NoRoot", "NoConvergence", "FloorHit", "QuadratureError"}


def test_solve_three_pieces(tmp_path, capsys):
    code, _ = run(["solve", "--lambda", "1/2", "--weight", "30,10,-40.1", "--force",
                   "--out", str(tmp_path)], capsys)
    assert code == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["solver"] == "continuation+shoot" and s["residual"] <= 1e-5


def test_trace(tmp_path, capsys):
    code, out = run(["trace", "--lambda", "1/2", "--weight", "36,-36", "--beta-target", "1.05",
                     "--out", str(tmp_path)], capsys)
    assert code == 0
    term = json.loads((tmp_path / "termination.json").read_text())
    assert term["termination"] == "BetaTarget" and term["beta_star_empirical"] >= 1
    assert term["lower_bound"] == "1" and term["lower_bound_name"] == "two_halves"
    assert "beta* lower bound    1 (two_halves)" in out.out
    head = (tmp_path / "branch.csv").read_text().splitlines()[0]
    assert head == "beta,m_rho,x,y,f_inf,residual"


def test_trace_zero_target(tmp_path, capsys):
    assert run(["trace", "--lambda", "1/2", "--weight", "36,-36", "--beta-target", "0",
                "--out", str(tmp_path)], capsys)[0] == 0
    assert len((tmp_path / "branch.jsonl").read_text().splitlines()) == 1


def test_trace_trivial_weight(capsys):
    code, out = run(["trace", "--lambda", "1/2", "--weight", "2,2"], capsys)
    assert code == 4 and out.err.startswith("TrivialWeight")


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"lambda": "1/2", "weight": {"kind": "piecewise_constant", "period": 1,
                                                          "breakpoints": [0, "1/2"], "values": [35, -37]},
                               "json": True}))
    code, out = run(["check", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out.out)["any_satisfied"]
    assert run(["check", "--config", str(cfg), "--weight", "1,-3"], capsys)[0] == 3
    cfg.write_text(json.dumps({"lambda": "1/2", "weight": "35,-37", "bogus": 1}))
    assert run(["check", "--config", str(cfg)], capsys)[0] == 2


def test_inline_json_weight(capsys):
    w = '{"kind": "piecewise_constant", "period": 1, "breakpoints": [0, 0.5], "values": [35, -37]}'
    assert run(["check", "--lambda", "1/2", "--weight", w], capsys)[0] == 0


def test_byte_reproducible(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"r{k}"
        assert main(["trace", "--lambda", "1/2", "--weight", "36,-36", "--beta-target", "1",
                     "--out", str(d)]) == 0
        assert main(["solve", "--lambda", "1/2", "--weight", "35,-37", "--out", str(d)]) == 0
        outs.append({f: (d / f).read_bytes() for f in sorted(os.listdir(d))})
    assert outs[0] == outs[1]


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "weaksing.cli", "check", "--lambda", "1/2",
                        "--weight", "35,-37"], capture_output=True, text=True)
    assert r.returncode == 0 and "cor1" in r.stdout
