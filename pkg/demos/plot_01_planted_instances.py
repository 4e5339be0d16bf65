"""
Planted 3-SAT instances
=======================

Draw a hidden assignment, keep each clause it satisfies with probability
p = d/n**2, and look at the occurrence statistics.
"""

import numpy as np

from warnprop.factor_graph import OccurrenceIndex, build
from warnprop.formula import evaluate, write_dimacs
from warnprop.generator import GenParams, generate, universe_size

n, d = 3000, 20
inst = generate(GenParams(n=n, d=d, seed=0))
f = inst.formula
print("clauses:", f.m, "expected about", 7 * d * n / 6)
print("planted assignment satisfies:", evaluate(f, inst.planted))

# occurrences relative to the planted value of each variable
occ = OccurrenceIndex.build(build(f), inst.planted)
agree = occ.n_support[1:] + occ.n_agree[1:]
print("agreeing occurrences per variable:", agree.mean(), "(2d =", 2 * d, ")")
print("disagreeing occurrences per variable:", occ.n_disagree[1:].mean(), "(3d/2 =", 1.5 * d, ")")
print("supported clauses per variable:", occ.n_support[1:].mean(), "(d/2 =", d / 2, ")")

# a tiny instance in DIMACS form
small = generate(GenParams(n=5, p=0.05, seed=1))
print(universe_size(5), "candidate clauses for n=5")
print(write_dimacs(small.formula))
