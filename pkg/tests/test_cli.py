import json

import pytest

from prominence.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_theta(capsys):
    code, out, err = run(capsys, "theta", "--dist", "uniform", "--V", "2", "--c", "0.125")
    doc = json.loads(out)
    assert code == 0 and doc["theta0"] == "2.5" and doc["cbar"] == "0.5"
    assert "regime=main" in err
    code, out, err = run(capsys, "theta", "--c", "0.6")
    assert code == 0 and json.loads(out)["regime"] == "degenerate" and "warning" in err
    code, _, _ = run(capsys, "theta", "--c", "-1")
    assert code == 2


def test_demand_rows(capsys):
    code, out, _ = run(capsys, "demand", "--c", "0.125", "--x-grid", "-1.5:-1:3", "--seed", "1",
                       "--n", "1000")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,D_c,D_tilde,D_bb,D_mc,D_mc_stderr"
    assert all(line.split(",")[1] == "1" for line in lines[1:])
    assert run(capsys, "demand", "--c", "0.125", "--x-grid", "-1:0:0", "--seed", "1")[0] == 2
    assert run(capsys, "demand", "--c", "0.125", "--x-grid", "-1:0:3")[0] == 2


def test_demand_grid_agrees_with_simulation(capsys):
    code, out, _ = run(capsys, "demand", "--c", "0.125", "--x-grid", "-1.2:0.6:100", "--seed",
                       "2024", "--n", "100000")
    assert code == 0
    for line in out.splitlines()[1:]:
        x, dc, _, _, dmc, _ = map(float, line.split(","))
        se = (dc * (1 - dc) / 100_000) ** 0.5
        assert abs(dc - dmc) <= 3 * se + 1e-9, x


def test_range_and_verify(capsys):
    code, out, _ = run(capsys, "range", "--c", "0.125", "--mech", "dictator")
    doc = json.loads(out)
    assert code == 0 and set(doc) >= {"mechanism", "c", "t_star", "upper", "empty"}
    assert float(doc["t_star"]) == pytest.approx(0.1344, abs=1e-4) and doc["empty"] is False
    assert run(capsys, "range", "--c", "0.7")[0] == 2
    code, out, _ = run(capsys, "range", "--dist", "tiltedexp", "--k", "1", "--c-grid",
                       "0.05:0.5:4", "--mech", "threshold", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "mechanism,c,t_star,upper,empty"
    code, out, _ = run(capsys, "verify", "--c", "0.125", "--mech", "dictator:1.0")
    assert code == 0 and json.loads(out)["equilibrium"] is True
    code, out, _ = run(capsys, "verify", "--c", "0.125", "--mech", "dictator", "--t", "2.5")
    doc = json.loads(out)
    assert doc["equilibrium"] is False and float(doc["witness"]["price"]) < 2.5
    assert run(capsys, "verify", "--c", "0.125", "--mech", "plain", "--t", "1")[0] == 2


def test_sweep_and_simulate(capsys):
    code, out, _ = run(capsys, "sweep", "--c-grid", "0.05:0.45:5")
    assert code == 0 and out.splitlines()[0] == "c,theta0,t_star,sw,cs_at_tstar,sw_stderr"
    assert len(out.splitlines()) == 6
    assert run(capsys, "sweep", "--c-grid", "0.05:0.45:2", "--m", "3")[0] == 2
    code, out, _ = run(capsys, "simulate", "--c", "0.125", "--t", "0.3", "--mech", "dictator:0.3",
                       "--seed", "1", "--n", "50000")
    doc = json.loads(out)
    assert code == 0 and doc["purchase_rate"] == "1" and len(doc["demand"]) == 2
    assert run(capsys, "simulate", "--c", "0.125", "--t", "0.3")[0] == 2


def test_output_is_byte_identical_across_workers(capsys, tmp_path):
    outs = []
    for w in ("1", "3"):
        path = tmp_path / f"o{w}.json"
        main(["simulate", "--c", "0.2", "--m", "3", "--prices", "0.2,0.3,0.4", "--mech", "lpf",
              "--seed", "7", "--n", "150000", "--workers", w, "--out", str(path)])
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_pwl_prior_file(capsys, tmp_path):
    path = tmp_path / "prior.json"
    path.write_text(json.dumps({"V": 2, "knots": [[2, 0], [2.5, 0.3], [3, 1]]}))
    code, out, _ = run(capsys, "theta", "--dist", f"pwl:{path}", "--c", "0.1")
    assert code == 0 and 2 < float(json.loads(out)["theta0"]) < 3
    assert run(capsys, "theta", "--dist", "pwl:/nonexistent.json", "--c", "0.1")[0] == 2
    path.write_text(json.dumps({"V": 2, "knots": [[2, 0]]}))
    assert run(capsys, "theta", "--dist", f"pwl:{path}", "--c", "0.1")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "theta", "--c", "0.1", "--c-grid", "0.1:0.2:3")[0] == 2
    assert run(capsys, "range", "--c-grid", "bad")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
