import csv
import io
import json
import subprocess
import sys

import pytest

from frogtree import __version__
from frogtree.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    return [l for l in text.splitlines() if not l.startswith("#")]


def table(text):
    return list(csv.DictReader(io.StringIO("\n".join(body(text)))))


def header(text):
    return dict(l[2:].split(" = ", 1) for l in text.splitlines()
                if l.startswith("# ") and " = " in l)


def test_bounds_threshold(capsys):
    code, out, _ = run(capsys, "bounds", "--T", "51", "--tol", "1e-5")
    assert code == EXIT_OK
    h = header(out)
    assert 0.7106 <= float(h["rho_star"]) <= 0.7108
    assert 0.4154 <= float(h["p_star"]) <= 0.4156
    assert float(h["q_star"]) == pytest.approx(0.1464466094)
    assert out.startswith(f"# frogtree {__version__}")
    assert len(table(out)) == 51


def test_bounds_none_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "bounds", "--T", "1")
    assert header(out)["rho_star"] == "NONE"
    f = tmp_path / "b.json"
    assert run(capsys, "bounds", "--T", "200", "--json", "--out", str(f))[0] == EXIT_OK
    doc = json.loads(f.read_text())
    assert doc["schema_version"] == 1 and doc["config"]["T"] == 200
    assert doc["result"]["rho_star"] <= 0.7108


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--rho", "0.6", "--T", "5", "--base", "zero")
    rows = table(out)
    assert code == 0 and len(rows) == 6
    assert rows[0]["ev_lo"] == "0.0" and rows[0]["x_hi"] == ""


def test_simulate_examples(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "rfm", "--d", "2", "--p", "0", "--trials", "10")
    assert code == 0
    rows = table(out)
    assert len(rows) == 10 and all(r["root_visits"] == "0" for r in rows)
    code, out, _ = run(capsys, "simulate", "--model", "fm", "--p", "0.45", "--depth", "0",
                       "--trials", "5")
    assert all(r["root_visits"] == "0" for r in table(out))
    assert "# summary mean = 0.0" in out


def test_simulate_deterministic_and_parallel(capsys, tmp_path):
    args = ["simulate", "--model", "fmprime", "--p", "0.4", "--depth", "6", "--trials", "8",
            "--seed", "5"]
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    c = run(capsys, *args, "--workers", "2")[1]
    assert body(a) == body(c)


def test_simulate_invariant_checks(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "rfm", "--p", "0.4", "--trials", "5",
                       "--depth", "5", "--check-invariants", "on")
    assert code == 0 and "# summary violations = 0" in out


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# a config\nmodel = rfm\np = 0.3   # drift\ntrials = 4\ndepth = 4\n")
    assert read_config_file(str(cfg))["p"] == "0.3"
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--trials", "2")
    h = header(out)
    assert code == 0 and h["model"] == "rfm" and h["p"] == "0.3" and h["trials"] == "2"
    assert len(table(out)) == 2
    cfg2 = tmp_path / "m.cfg"
    cfg2.write_text("rho = 0.5\nT = 3\n")
    assert run(capsys, "moments", "--config", str(cfg2))[0] == 0


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "simulate", "--bogus")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--p", "1.5")[0] == EXIT_USAGE
    assert run(capsys, "bounds", "--T", "0")[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--out", str(tmp_path / "no" / "x.csv"))[0] == EXIT_IO
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.cfg"))[0] == EXIT_IO
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = green\n")
    assert run(capsys, "simulate", "--config", str(bad))[0] == EXIT_USAGE
    bad.write_text("just words\n")
    assert run(capsys, "simulate", "--config", str(bad))[0] == EXIT_USAGE


def test_couple_identity_and_report(capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "couple", "--kind", "fm-kd", "--d", "2", "--k", "1", "--p", "0.3",
                       "--depth", "6", "--trials", "20", "--report", str(rep))
    assert code == 0
    rows = table(out)
    assert all(r["fm_root_visits"] == r["fm_2_root_visits"] for r in rows)
    doc = json.loads(rep.read_text())
    assert doc["violations"] == 0 and doc["first_violation"] is None
    code, out, _ = run(capsys, "couple", "--kind", "rfm-plus1", "--p", "0.4", "--depth", "6",
                       "--trials", "20", "--report", str(rep))
    assert code == 0
    assert {r["s_prime"] for r in json.loads(rep.read_text())["kill_law"]} <= {1, 2, 3}


def test_couple_violation_exit(capsys, monkeypatch, tmp_path):
    import frogtree.coupling as C
    from frogtree import _kernels as K

    real = C.coupled_trials

    def faulty(*a, **kw):
        # route through the python engine with a broken follower
        orig = C._fm_kd_python
        monkeypatch.setattr(C, "_fm_kd_python",
                            lambda config, k, seed, check, fault: orig(config, k, seed, check,
                                                                       K.FAULT_IGNORE_BLOCK))
        kw["engine"] = "python"
        return real(*a, **kw)

    monkeypatch.setattr(C, "coupled_trials", faulty)
    rep = tmp_path / "r.json"
    code, out, err = run(capsys, "couple", "--kind", "fm-kd", "--p", "0.4", "--depth", "5",
                         "--trials", "10", "--report", str(rep))
    assert code == EXIT_VIOLATION
    fv = json.loads(rep.read_text())["first_violation"]
    assert "trial_seed" in fv and "trial_seed" in err


def test_sweep_labels(capsys, tmp_path):
    js = tmp_path / "s.json"
    code, out, _ = run(capsys, "sweep", "--p-grid", "0.1,0.45", "--depth-grid", "4,6,8",
                       "--trials", "40", "--json", str(js))
    assert code == 0
    for r in table(out):
        assert "consistent with" in r["diagnostic"] and "heuristic" in r["diagnostic"]
    assert json.loads(js.read_text())["schema_version"] == 1


def test_vt_modes(capsys):
    code, out, _ = run(capsys, "vt", "--t", "0", "--rho", "0.6", "--trials", "4000")
    rows = {r["mode"]: r for r in table(out)}
    assert code == 0 and set(rows) == {"bound", "empirical"}
    for r in rows.values():
        assert abs(float(r["mean"]) - 0.6) < 0.04
    code, out, _ = run(capsys, "vt", "--t", "2", "--mode", "empirical", "--trials", "100",
                       "--root-frog", "descend")
    assert [r["mode"] for r in table(out)] == ["empirical"]


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "frogtree.cli", "bounds", "--T", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("# frogtree")
