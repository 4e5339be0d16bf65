"""
Experiment grids
================

Run a small grid, write report.json and report.csv, read the aggregates.
"""

import math
import tempfile

from warnprop.harness import ExperimentSpec, run_experiment

n = 2000
spec = ExperimentSpec(
    cells=[{"n": n, "d": 25}, {"n": n, "p": 60 * math.log(n) / n**2}],
    seeds=3,
    master_seed=1,
    diagnostics=["components"],
)
out = tempfile.mkdtemp()
rep = run_experiment(spec, out)
for cell in rep.cells:
    print({k: cell[k] for k in ("n", "d", "p", "success_rate", "mean_passes", "mean_assigned_fraction", "psi_equals_phi_rate")})
print("written to", out)
