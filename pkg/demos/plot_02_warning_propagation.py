"""
Warning propagation
===================

Random initial warnings, sequential updates in a fresh random edge order
each pass, stop after a pass that changes nothing.
"""

import numpy as np

from warnprop.formula import Formula
from warnprop.generator import GenParams, generate
from warnprop.wp import WPConfig, is_fixed_point, run

inst = generate(GenParams(n=10**4, d=25, seed=3))
r = run(inst.formula, WPConfig(seed=3))
print("converged:", r.converged, "after", r.passes_used, "passes")
print("changes per pass:", r.changes)
print("assigned fraction:", r.assigned_fraction)

phi = np.where(inst.planted, 1, -1)
assigned = r.assignment != 0
print("assigned variables agreeing with the planted value:", np.mean(r.assignment[assigned] == phi[assigned]))

# all positive literals: every warning dies, nothing gets assigned
f = Formula.from_clauses(4, [(1, 2, 3), (2, 3, 4), (1, 4)])
r = run(f, WPConfig(seed=0))
print(r.passes_used, r.bias[1:], r.assignment)
print("all-zero is a fixed point:", is_fixed_point(f, np.zeros(8, np.uint8)))
