import csv
import json
import math

import pytest

from warnprop.harness import ExperimentSpec, run_experiment, run_seed

TIMING = ("t_generate", "t_wp", "t_simplify", "t_residual")


def _strip(rows):
    return [{k: v for k, v in r.items() if not k.startswith(("t_", "mean_t_"))} for r in rows]


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(cells=[])
    with pytest.raises(ValueError):
        ExperimentSpec(cells=[{"n": 10}])
    with pytest.raises(ValueError):
        ExperimentSpec(cells=[{"n": 10, "d": 1, "p": 0.1}])
    with pytest.raises(ValueError):
        ExperimentSpec(cells=[{"n": 10, "d": 1}], seeds=0)
    with pytest.raises(ValueError):
        ExperimentSpec(cells=[{"n": 10, "d": 1}], diagnostics=["nope"])


def test_seed_derivation():
    assert run_seed(0, 0, 0) == run_seed(0, 0, 0)
    assert len({run_seed(0, c, r) for c in range(3) for r in range(3)}) == 9


def test_report_and_reproducibility(tmp_path):
    spec = ExperimentSpec(cells=[{"n": 300, "d": 25}, {"n": 300, "p": 0.01}], seeds=3, master_seed=7,
                          diagnostics=["core", "components"])
    a = run_experiment(spec, tmp_path / "a")
    b = run_experiment(spec, tmp_path / "b")
    assert _strip(a.runs) == _strip(b.runs) and _strip(a.cells) == _strip(b.cells)
    assert [c["runs"] for c in a.cells] == [3, 3]
    assert a.cells[0]["success_rate"] == 1.0
    assert "mean_core_fraction" in a.cells[0] and "noncore_max_component" in a.cells[0]
    data = json.loads((tmp_path / "a" / "report.json").read_text())
    with open(tmp_path / "a" / "report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(data["cells"]) == 2
    for row, cell in zip(rows, data["cells"]):
        for k, v in cell.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                got = float(row[k])
                assert got == v or (math.isnan(got) and math.isnan(v))


def test_dense_cell_psi_equals_phi():
    n = 2000
    spec = ExperimentSpec(cells=[{"n": n, "p": 60 * math.log(n) / n**2}], seeds=2)
    rep = run_experiment(spec)
    assert rep.cells[0]["psi_equals_phi_rate"] == 1.0


def test_empty_diagnostics_solving_only():
    rep = run_experiment(ExperimentSpec(cells=[{"n": 200, "d": 25}], seeds=2))
    assert all("core_fraction" not in r for r in rep.runs)
    assert "mean_core_fraction" not in rep.cells[0]
    assert rep.cells[0]["success_rate"] == 1.0


def test_failures_recorded_not_raised(tmp_path):
    # a one-pass cap on a sparse instance cannot confirm convergence
    spec = ExperimentSpec(cells=[{"n": 500, "d": 25}], seeds=2, max_passes=1)
    rep = run_experiment(spec, tmp_path)
    assert all(r["status"] == "NO_CONVERGENCE" for r in rep.runs)
    assert rep.cells[0]["success_rate"] == 0.0
    assert len(list((tmp_path / "failures").glob("*.cnf"))) == 2


def test_spec_files(tmp_path):
    j = tmp_path / "s.json"
    j.write_text(json.dumps({"cells": [{"n": 100, "d": 20}], "seeds": 2}))
    t = tmp_path / "s.toml"
    t.write_text('seeds = 2\ncells = [{n = 100, d = 20}]\n')
    assert ExperimentSpec.from_file(j) == ExperimentSpec.from_file(t)


def test_workers_match_serial():
    spec = ExperimentSpec(cells=[{"n": 200, "d": 25}], seeds=3, master_seed=3)
    par = ExperimentSpec(cells=[{"n": 200, "d": 25}], seeds=3, master_seed=3, workers=2)
    assert _strip(run_experiment(spec).runs) == _strip(run_experiment(par).runs)
