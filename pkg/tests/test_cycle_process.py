import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from warnprop.cycle_process import (
    color_runs,
    exact_absorption,
    free_cycle_formula,
    interval_length_series,
    is_absorbed,
    left_advance,
    martingale_check,
    run_until_absorbed,
    shift_law,
    simulate,
    step,
    track_interval,
    transition_counts,
)
from warnprop.factor_graph import build, components, ComponentClass
from warnprop.wp import WPConfig, run


def _runs(s):
    s = list(s)
    return sum(1 for i in range(len(s)) if s[i] != s[i - 1])


def test_step_examples():
    rng = np.random.default_rng(0)
    assert step([0, 0, 0, 0], rng).tolist() == [0, 0, 0, 0]
    assert step([0, 1], rng, sigma=[0, 1]).tolist() == [1, 1]
    assert step([0, 1], rng, sigma=[1, 0]).tolist() == [0, 0]
    with pytest.raises(ValueError):
        step([1], rng)


def test_step_copies_right_neighbour():
    # 2 copies 3 -> 1011, 0 copies 1 -> 0011, 1 copies 2 -> 0111, 3 copies 0 -> 0110
    assert step([1, 0, 0, 1], None, sigma=[2, 0, 1, 3]).tolist() == [0, 1, 1, 0]


@pytest.mark.parametrize("L", range(2, 7))
def test_run_count_never_increases(L):
    for mask in range(2**L):
        s = [(mask >> i) & 1 for i in range(L)]
        before = _runs(s)
        for sigma in permutations(range(L)):
            assert _runs(step(s, None, sigma=sigma)) <= before


def test_absorbing_states():
    rng = np.random.default_rng(1)
    for L in range(2, 7):
        for mask in range(2**L):
            s = np.array([(mask >> i) & 1 for i in range(L)])
            if is_absorbed(s):
                assert np.array_equal(step(s, rng), s)
    K = transition_counts(4)
    assert (K.sum(axis=1) == math.factorial(4)).all()
    fixed = [s for s in range(16) if K[s, s] == 24]
    assert fixed == [0, 15]


def test_run_until_absorbed():
    rng = np.random.default_rng(2)
    assert run_until_absorbed([1, 1, 1], 10, rng) == 0
    assert all(run_until_absorbed([0, 1], 10, rng) == 1 for _ in range(50))
    assert run_until_absorbed([0, 1, 0, 1, 0, 1, 0, 1], 1, rng) in (None, 1)
    with pytest.raises(ValueError):
        run_until_absorbed([0, 1], 0, rng)
    st = simulate(2, 2000, 3, start=[0, 1])
    assert (st.samples == 1).all()
    assert abs(st.absorbed_ones - 0.5) < 0.05


def test_mean_time_l8():
    st = simulate(8, 10**4, 4)
    assert st.timeouts == 0 and st.mean <= 2 * 8**2


def test_exact_l2_l3():
    ex = exact_absorption(2)
    assert ex.expected_T[1] == 1 and ex.expected_T[2] == 1
    ex = exact_absorption(3)
    assert all(v <= 18 for v in ex.expected_T.values())
    assert all(isinstance(v, (Fraction, int)) for v in ex.expected_T.values())


@pytest.mark.parametrize("L", range(2, 7))
def test_exact_bounds(L):
    ex = exact_absorption(L)
    assert ex.exact
    assert ex.max_expected() <= 2 * L * L
    for a in (1, 2, 3):
        assert max(ex.tail[a].values()) <= Fraction(L, 2**a)


def test_exact_solution_satisfies_first_step_equation():
    L = 4
    ex = exact_absorption(L)
    K = transition_counts(L)
    for s in range(1, 2**L - 1):
        rhs = 1 + sum(Fraction(int(K[s, t]), 24) * ex.expected_T[t] for t in range(2**L))
        assert ex.expected_T[s] == rhs


@pytest.mark.parametrize("L", range(2, 7))
def test_simulator_matches_exact(L):
    ex = exact_absorption(L)
    mu = float(sum(ex.expected_T.values()) / 2**L)
    st = simulate(L, 10**5, 100 + L)
    assert abs(st.mean - mu) <= 3 * st.sem


def test_float_and_sampled_chains():
    ex7 = exact_absorption(7)
    assert not ex7.exact
    st = simulate(7, 10**5, 5)
    mu = sum(ex7.expected_T.values()) / 2**7
    assert abs(st.mean - mu) <= 3 * st.sem
    ex9 = exact_absorption(9, samples=400, tail_a=(1,))
    assert not ex9.exact and ex9.max_expected() <= 2 * 81
    with pytest.raises(ValueError):
        exact_absorption(11)


def test_color_runs_and_series():
    c = color_runs([1, 1, 0, 0, 0, 1])
    assert c[0] == c[1] == c[5] and c[2] == c[3] == c[4] and c[0] != c[2]
    s = interval_length_series([1, 1, 1, 1], [[0, 1, 2, 3]] * 3)
    assert s.tolist() == [4, 4, 4, 4]
    # interval {0,1} of ones; sigma [1, 0, 2, 3]: 1 copies 2 (a zero), then 0 copies 1
    s = interval_length_series([1, 1, 0, 0], [[1, 0, 2, 3]])
    assert s.tolist() == [2, 0]
    rng = np.random.default_rng(0)
    t = track_interval([1, 0, 0, 0, 0, 0], rng)
    assert t[-1] in (0, 6) and t[0] == 1


def test_martingale_l8():
    mc = martingale_check(8, 20000, 7)
    assert mc.passes()
    assert all(v >= 1000 for v in mc.visits.values())
    assert all(mc.second_moment[k] >= 0.5 for k in mc.visits)


@pytest.mark.parametrize("k", range(1, 6))
def test_shift_law_exact_l6(k):
    L = 6
    state = [1] * k + [0] * (L - k)
    adv = [left_advance(state, s) for s in permutations(range(L))]
    total = len(adv)
    for j, p in shift_law(L, k).items():
        got = sum(1 for a in adv if a is not None and a >= j) / total
        assert got == pytest.approx(p, abs=1e-12)
    # the complementary interval (length L - k) follows 1/j! - 1/(L-k+j)!
    comp = [1] * (L - k) + [0] * k
    adv = [left_advance(comp, s) for s in permutations(range(L))]
    for j in range(1, k + 1):
        got = sum(1 for a in adv if a is not None and a >= j) / total
        assert got == pytest.approx(1 / math.factorial(j) - 1 / math.factorial(L - k + j), abs=1e-12)


@pytest.mark.parametrize("k", range(1, 6))
def test_shift_law_sampled_l6(k):
    L, N = 6, 20000
    rng = np.random.default_rng(k)
    state = [1] * k + [0] * (L - k)
    adv = np.array([left_advance(state, rng.permutation(L)) or 0 for _ in range(N)])
    for j, p in shift_law(L, k).items():
        got = np.mean(adv >= j)
        assert abs(got - p) <= 3 * math.sqrt(p * (1 - p) / N) + 1e-12


def test_free_cycle_formula_is_unicyclic():
    f = free_cycle_formula(6)
    assert f.clauses[0] == (1, -2) and f.clauses[-1] == (6, -1)
    (c,) = components(build(f))
    assert c.kind is ComponentClass.UNICYCLIC
    g = free_cycle_formula(4, polarity=[True, False, True, False])
    assert g.clauses[0] == (1, 2)


def _direction_times(history, slot):
    """Passes until the messages of one direction (slot 0 or 1 of each clause) are constant."""
    for t, msg in enumerate(history):
        d = msg[slot::2]
        if (d == d[0]).all():
            return t
    return None


def test_wp_free_cycle_matches_process():
    L, runs = 6, 4000
    f = free_cycle_formula(L)
    g = build(f)
    assert g.edge_sign.tolist() == [1, -1] * L
    back, fwd = [], []
    for seed in range(runs):
        r = run(g, WPConfig(seed=seed, record_history=True))
        assert r.converged
        back.append(_direction_times(r.history, 0))
        fwd.append(_direction_times(r.history, 1))
    sim = simulate(L, runs, 99).samples
    for wp_times in (back, fwd):
        cap = 10
        a = np.bincount(np.minimum(wp_times, cap), minlength=cap + 1)
        b = np.bincount(np.minimum(sim, cap), minlength=cap + 1)
        keep = (a + b) > 0
        p = chi2_contingency(np.vstack([a[keep], b[keep]]))[1]
        assert p > 0.01
