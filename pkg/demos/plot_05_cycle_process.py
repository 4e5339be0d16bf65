"""
The ring copying process
========================

Each round visits the positions of a ring in random order; a visited
position copies its right neighbour. WP on a free cycle does exactly this.
"""

import numpy as np

from warnprop import cycle_process as cp
from warnprop.wp import WPConfig, run

rng = np.random.default_rng(0)
print(cp.step([0, 1], rng, sigma=[0, 1]), cp.step([0, 1], rng, sigma=[1, 0]))

for L in range(2, 7):
    ex = cp.exact_absorption(L)
    mean = float(sum(ex.expected_T.values()) / 2**L)
    st = cp.simulate(L, 20000, L)
    print(f"L={L} exact E[T]={mean:.4f} simulated {st.mean:.4f} +- {st.sem:.4f} bound {2 * L * L}")

mc = cp.martingale_check(8, 5000, 1)
for row in mc.to_dict()["rows"]:
    print(row)

# shift law of one interval's left endpoint
print(cp.shift_law(6, 2))

# WP on (x1 | ~x2) & (x2 | ~x3) & ... & (x6 | ~x1)
f = cp.free_cycle_formula(6)
r = run(f, WPConfig(seed=2, record_history=True))
for msgs in r.history:
    print(msgs[0::2], msgs[1::2])
