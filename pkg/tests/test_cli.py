import json
import subprocess
import sys

import numpy as np

from warnprop.cli import main
from warnprop.formula import evaluate, read_dimacs


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_generate_solve_roundtrip(tmp_path, capsys):
    cnf, planted = tmp_path / "f.cnf", tmp_path / "phi.json"
    assert main(["generate", "--n", "300", "--d", "25", "--seed", "3", "--planted-out", str(planted), "-o", str(cnf)]) == 0
    out = _json(capsys)
    f = read_dimacs(cnf)
    assert out["m"] == f.m
    phi = np.array(json.loads(planted.read_text()))
    assert evaluate(f, phi)
    assert main(["solve", str(cnf), "--seed", "1", "--planted", str(planted)]) == 0
    rep = _json(capsys)
    assert rep["status"] == "SAT"
    assert evaluate(f, np.array(json.loads(open(rep["assignment_path"]).read())))


def test_wp_run_json(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    main(["generate", "--n", "200", "--d", "30", "-o", str(cnf)])
    capsys.readouterr()
    assert main(["wp", "run", str(cnf), "--json"]) == 0
    out = _json(capsys)
    assert out["converged"] and len(out["psi"]) == 200
    main(["wp", "run", str(cnf)])
    assert "converged after" in capsys.readouterr().out


def test_analyze(tmp_path, capsys):
    cnf, planted = tmp_path / "f.cnf", tmp_path / "phi.json"
    main(["generate", "--n", "100", "--d", "20", "--planted-out", str(planted), "-o", str(cnf)])
    capsys.readouterr()
    main(["analyze", "components", str(cnf)])
    comps = _json(capsys)
    assert comps and {"size", "edges", "class"} <= set(comps[0])
    vs = tmp_path / "vs.json"
    vs.write_text(json.dumps([1, 2, 3, 4, 5]))
    main(["analyze", "components", str(cnf), "--induced-by", str(vs)])
    assert all(c["size"] <= 5 for c in _json(capsys))
    main(["analyze", "core", str(cnf), "--planted", str(planted), "--d", "20"])
    assert _json(capsys)["n"] == 100


def test_cycle_sim(capsys):
    main(["cycle-sim", "--L", "4", "--trials", "2000", "--exact"])
    out = _json(capsys)
    assert set(out) >= {"mean_T", "tail_table", "martingale_check", "exact"}
    assert abs(out["mean_T"] - out["exact"]["mean_expected_T_uniform_start"]) < 5 * out["sem_T"]


def test_experiment(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"cells": [{"n": 100, "d": 25}], "seeds": 2}))
    main(["experiment", "--spec", str(spec), "-o", str(tmp_path / "out")])
    assert _json(capsys)[0]["runs"] == 2
    assert (tmp_path / "out" / "report.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "warnprop", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "cycle-sim" in r.stdout
