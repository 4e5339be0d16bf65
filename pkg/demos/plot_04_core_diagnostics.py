"""
Core diagnostics
================

Support deficiency, stability and violation relative to the first pass's
edge order and initial messages, then iterative peeling.
"""

import numpy as np

from warnprop import analysis
from warnprop.factor_graph import build, census, components
from warnprop.generator import GenParams, generate
from warnprop.harness import first_pass_inputs

n, d = 2000, 30
inst = generate(GenParams(n=n, d=d, seed=0))
g = build(inst.formula)
alpha, order = first_pass_inputs(g, 0)

params = analysis.StabilityParams(d)
print("thresholds:", params.support_min, params.gap, params.core_support_min, params.warn_min)
rep = analysis.core(inst, order, alpha, params)
print(rep.summary())

# with the d/30 gap, a variable seen ~3d/2 times per side is almost never
# exactly balanced, so the stability test rejects nearly everything
occ = analysis.OccurrenceIndex.build(g, inst.planted)
imbalance = np.abs(occ.n_agree - occ.n_disagree)[1:]
print("share of variables with |N++ - N-| <= d/30:", np.mean(imbalance * 30 <= d))

# the peeling step alone, started from every variable
inside, trace = analysis.peel_core(g, occ, np.ones(n + 1, dtype=bool), params)
print("peeled from V:", int(inside[1:].sum()), "variables remain")
rest = analysis.noncore_formula(inst, set(np.flatnonzero(inside)))
print(census(components(build(rest))))
