"""
Solving what is left
====================

Simplify by the WP assignment, split the rest into components and solve
trees by peeling leaves and unicyclic components by branching once.
"""

from warnprop.formula import Formula, evaluate
from warnprop.generator import GenParams, generate
from warnprop.residual import solve_planted, solve_residual, solve_tree, solve_unicyclic
from warnprop.wp import WPConfig

print(solve_tree([(-1, 2), (-2,)]).assignment)
out = solve_unicyclic([(1, 2), (-1, -2)])
print(out.status.value, out.assignment, out.log)

f = Formula.from_clauses(6, [(-1, 2), (-2,), (3, 4), (-3, -4), (5, 6, -3)])
out = solve_residual(f)
print(out.status.value, [e["class"] for e in out.log])

# the whole pipeline on a sparse planted instance
inst = generate(GenParams(n=10**4, d=12, seed=5))
res = solve_planted(inst, WPConfig(seed=5))
rep = res.report
print(rep.status, "passes", rep.passes, "assigned", round(rep.assigned_fraction, 4))
print("residual:", rep.residual_clauses, "clauses,", rep.residual_components)
print("satisfies the original formula:", evaluate(inst.formula, res.assignment))
