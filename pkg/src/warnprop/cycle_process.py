"""The ring copying process behind free-cycle convergence.

State: ``L`` bits on a ring. One round draws a uniform permutation ``sigma``
of the positions and, for ``j = 0..L-1`` in turn, overwrites position
``sigma[j]`` with the current value at ``sigma[j] + 1 (mod L)``. Rounds
repeat until the ring is constant.

This module simulates the process, tracks the length of a single colored
interval (the quantity that forms a martingale), and builds the exact
Markov chain for small rings as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .wp import njit


@njit(cache=True)
def _apply(state, sigma):
    L = state.size
    out = state.copy()
    for j in range(L):
        i = sigma[j]
        out[i] = out[(i + 1) % L]
    return out


def step(state, rng: np.random.Generator, sigma=None) -> np.ndarray:
    """One round. ``sigma`` may be given explicitly (a permutation of 0..L-1)."""
    s = np.asarray(state)
    if s.size < 2:
        raise ValueError("ring length must be at least 2")
    if sigma is None:
        sigma = rng.permutation(s.size)
    return _apply(s.astype(np.int64), np.asarray(sigma, dtype=np.int64)).astype(s.dtype)


def is_absorbed(state) -> bool:
    s = np.asarray(state)
    return bool(np.all(s == s[0]))


def run_until_absorbed(state, max_steps: int, rng: np.random.Generator) -> int | None:
    """Rounds until the ring is constant, or None after ``max_steps`` rounds."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    s = np.asarray(state, dtype=np.int64)
    t = 0
    while not is_absorbed(s):
        if t >= max_steps:
            return None
        s = _apply(s, rng.permutation(s.size))
        t += 1
    return t


@njit(cache=True)
def _absorb_many(starts, perms_seed, max_steps):
    np.random.seed(perms_seed)
    trials, L = starts.shape
    T = np.empty(trials, dtype=np.int64)
    ones = np.empty(trials, dtype=np.int8)
    sigma = np.arange(L)
    for k in range(trials):
        s = starts[k].copy()
        t = 0
        while True:
            tot = s.sum()
            if tot == 0 or tot == L:
                break
            if t >= max_steps:
                t = -1
                break
            np.random.shuffle(sigma)
            for j in range(L):
                i = sigma[j]
                s[i] = s[(i + 1) % L]
            t += 1
        T[k] = t
        ones[k] = 1 if s[0] == 1 else 0
    return T, ones


@dataclass
class AbsorptionStats:
    L: int
    samples: np.ndarray
    absorbed_ones: float
    timeouts: int = 0

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def sem(self) -> float:
        return float(self.samples.std(ddof=1) / math.sqrt(self.samples.size)) if self.samples.size > 1 else 0.0

    def quantiles(self, qs=(0.5, 0.9, 0.99)) -> dict:
        return {str(q): float(np.quantile(self.samples, q)) for q in qs}

    def tail(self, t: int) -> float:
        return float(np.mean(self.samples >= t))

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "trials": int(self.samples.size),
            "mean_T": self.mean,
            "sem_T": self.sem,
            "quantiles": self.quantiles(),
            "absorbed_ones": self.absorbed_ones,
            "timeouts": self.timeouts,
        }


def simulate(L: int, trials: int, seed: int, start=None, max_steps: int = 10**6) -> AbsorptionStats:
    """Absorption times from uniform random starts (or a fixed ``start``)."""
    if L < 2:
        raise ValueError("ring length must be at least 2")
    rng = np.random.default_rng(seed)
    if start is None:
        starts = rng.integers(0, 2, size=(trials, L)).astype(np.int64)
    else:
        starts = np.tile(np.asarray(start, dtype=np.int64), (trials, 1))
    T, ones = _absorb_many(starts, int(rng.integers(0, 2**31 - 1)), max_steps)
    done = T >= 0
    return AbsorptionStats(L, T[done], float(ones[done].mean()) if done.any() else float("nan"), int((~done).sum()))


# -- colored intervals ------------------------------------------------------


def color_runs(state) -> np.ndarray:
    """Label each maximal run of equal values on the ring with its own color."""
    s = np.asarray(state)
    L = s.size
    if is_absorbed(s):
        return np.zeros(L, dtype=np.int64)
    starts = [i for i in range(L) if s[i] != s[i - 1]]
    colors = np.empty(L, dtype=np.int64)
    for c, a in enumerate(starts):
        b = starts[(c + 1) % len(starts)]
        i = a
        while True:
            colors[i] = c
            i = (i + 1) % L
            if i == b:
                break
    return colors


def interval_start(colors, c: int) -> int | None:
    """Left endpoint of color ``c``: the member whose left neighbour differs."""
    col = np.asarray(colors)
    where = np.flatnonzero(col == c)
    if where.size == 0:
        return None
    if where.size == col.size:
        return 0
    for i in where:
        if col[i - 1] != c:
            return int(i)
    raise AssertionError("color is not an arc")


def interval_length_series(start, sigmas, color: int | None = None) -> np.ndarray:
    """Length of one colored interval along a run driven by ``sigmas``.

    Runs of ``start`` get distinct colors; the tracked color defaults to the
    one covering position 0. The series has one entry per round (plus the
    initial length) and stops early once the interval dies or fills the ring.
    An already constant start gives the constant series ``L``.
    """
    s = np.asarray(start, dtype=np.int64)
    L = s.size
    sigmas = list(sigmas)
    if is_absorbed(s):
        return np.full(len(sigmas) + 1, L, dtype=np.int64)
    colors = color_runs(s)
    c = int(colors[0]) if color is None else color
    out = [int(np.sum(colors == c))]
    for sigma in sigmas:
        if not 0 < out[-1] < L:
            break
        colors = _apply(colors, np.asarray(sigma, dtype=np.int64))
        out.append(int(np.sum(colors == c)))
    return np.asarray(out, dtype=np.int64)


def track_interval(start, rng: np.random.Generator, max_steps: int = 10**5) -> np.ndarray:
    """:func:`interval_length_series` with fresh random permutations until the
    tracked interval dies or fills the ring."""
    s = np.asarray(start, dtype=np.int64)
    if is_absorbed(s):
        return np.array([s.size], dtype=np.int64)
    colors = color_runs(s)
    c = int(colors[0])
    L = s.size
    out = [int(np.sum(colors == c))]
    while 0 < out[-1] < L and len(out) <= max_steps:
        colors = _apply(colors, rng.permutation(L))
        out.append(int(np.sum(colors == c)))
    return np.asarray(out, dtype=np.int64)


@dataclass
class MartingaleCheck:
    L: int
    drift: dict[int, float]
    sd: dict[int, float]
    visits: dict[int, int]
    second_moment: dict[int, float]

    def passes(self, min_visits: int = 1000, z: float = 3.0) -> bool:
        ok = True
        for k, nv in self.visits.items():
            if nv < min_visits:
                continue
            ok &= abs(self.drift[k]) <= z * self.sd[k] / math.sqrt(nv)
        return bool(ok)

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "rows": [
                {"k": k, "visits": self.visits[k], "drift": self.drift[k], "sd": self.sd[k],
                 "second_moment": self.second_moment[k]}
                for k in sorted(self.visits)
            ],
            "passes": self.passes(),
        }


@njit(cache=True)
def _increments(L, runs, seed, max_steps):
    """Per current length k: visit count, sum and sum of squares of the
    one-round change of the tracked interval length."""
    np.random.seed(seed)
    cnt = np.zeros(L + 1, dtype=np.int64)
    s1 = np.zeros(L + 1, dtype=np.int64)
    s2 = np.zeros(L + 1, dtype=np.int64)
    sigma = np.arange(L)
    colors = np.empty(L, dtype=np.int64)
    for _ in range(runs):
        s = np.random.randint(0, 2, L)
        tot = s.sum()
        if tot == 0 or tot == L:
            continue
        a = 0
        while s[a] == s[a - 1]:
            a += 1
        c = 0
        for t in range(L):
            i = (a + t) % L
            if t > 0 and s[i] != s[i - 1]:
                c += 1
            colors[i] = c
        tracked = colors[0]
        x = 0
        for i in range(L):
            if colors[i] == tracked:
                x += 1
        steps = 0
        while 0 < x < L and steps < max_steps:
            np.random.shuffle(sigma)
            for j in range(L):
                i = sigma[j]
                colors[i] = colors[(i + 1) % L]
            y = 0
            for i in range(L):
                if colors[i] == tracked:
                    y += 1
            cnt[x] += 1
            s1[x] += y - x
            s2[x] += (y - x) * (y - x)
            x = y
            steps += 1
    return cnt, s1, s2


def martingale_check(L: int, runs: int, seed: int, max_steps: int = 10**5) -> MartingaleCheck:
    """Empirical conditional drift of the tracked interval length per state."""
    cnt, s1, s2 = _increments(L, runs, seed, max_steps)
    drift, sd, visits, m2 = {}, {}, {}, {}
    for k in np.flatnonzero(cnt):
        nv = int(cnt[k])
        mean = s1[k] / nv
        visits[int(k)] = nv
        drift[int(k)] = float(mean)
        var = (s2[k] - nv * mean * mean) / (nv - 1) if nv > 1 else 0.0
        sd[int(k)] = float(math.sqrt(max(var, 0.0)))
        m2[int(k)] = float(s2[k] / nv)
    return MartingaleCheck(L, drift, sd, visits, m2)


def left_advance(state, sigma) -> int | None:
    """How far the left endpoint of the color at position 0's run moves left
    in one round under ``sigma``; None if that interval dies."""
    colors = color_runs(state)
    L = colors.size
    c = int(colors[0])
    a = interval_start(colors, c)
    new = _apply(colors, np.asarray(sigma, dtype=np.int64))
    if np.all(new == c):
        return int(L - np.sum(colors == c))
    b = interval_start(new, c)
    if b is None:
        return None
    return int((a - b) % L)


def shift_law(L: int, k: int) -> dict[int, float]:
    """Closed form P[left endpoint of a length-``k`` interval advances >= j],
    for the two-interval ring, ``j = 1..L-k``."""
    return {j: 1 / math.factorial(j) - 1 / math.factorial(k + j) for j in range(1, L - k + 1)}


# -- exact chain -------------------------------------------------------------


def _all_states(L):
    return (np.arange(2**L)[:, None] >> np.arange(L)) & 1


def transition_counts(L: int) -> np.ndarray:
    """Integer matrix K with K[s, t] = #{sigma : s -> t}; rows sum to L!."""
    if L > 8:
        raise ValueError("exact enumeration is limited to L <= 8")
    states = _all_states(L).astype(np.int64)
    perms = np.array(list(permutations(range(L))), dtype=np.int64)
    return _count_transitions(states, perms)


@njit(cache=True)
def _count_transitions(states, perms):
    S, L = states.shape
    K = np.zeros((S, S), dtype=np.int64)
    for s in range(S):
        for p in range(perms.shape[0]):
            out = _apply(states[s], perms[p])
            t = 0
            for i in range(L):
                t |= out[i] << i
            K[s, t] += 1
    return K


@njit(cache=True)
def _sample_transitions(states, samples, seed):
    np.random.seed(seed)
    S, L = states.shape
    K = np.zeros((S, S), dtype=np.int64)
    sigma = np.arange(L)
    for s in range(S):
        for _ in range(samples):
            np.random.shuffle(sigma)
            out = _apply(states[s], sigma)
            t = 0
            for i in range(L):
                t |= out[i] << i
            K[s, t] += 1
    return K


@dataclass
class ExactAbsorption:
    L: int
    exact: bool
    expected_T: dict[int, Fraction | float]  # by start state bitmask
    tail: dict[int, dict[int, Fraction | float]] = field(default_factory=dict)  # a -> state -> P[T >= 4aL^2]

    def max_expected(self):
        return max(self.expected_T.values())

    def to_dict(self) -> dict:
        def f(x):
            return float(x)

        return {
            "L": self.L,
            "exact": self.exact,
            "max_expected_T": f(self.max_expected()),
            "mean_expected_T_uniform_start": f(sum(self.expected_T.values()) / 2**self.L),
            "tail": {str(a): f(max(row.values())) for a, row in self.tail.items()},
        }


def exact_absorption(L: int, tail_a=(1, 2, 3), samples: int = 10**6, seed: int = 0) -> ExactAbsorption:
    """Expected absorption time and tail probabilities from every start.

    ``L <= 6`` is solved in rational arithmetic. ``L`` of 7 or 8 enumerates
    all permutations but solves in floating point. ``L`` of 9 or 10 estimates
    each transition row from ``samples`` random permutations (approximate).
    """
    if L < 2:
        raise ValueError("ring length must be at least 2")
    if L > 10:
        raise ValueError("exact_absorption supports L <= 10")
    S = 2**L
    absorbing = {0, S - 1}
    transient = [s for s in range(S) if s not in absorbing]
    if L <= 8:
        K = transition_counts(L)
        denom = math.factorial(L)
    else:
        K = _sample_transitions(_all_states(L).astype(np.int64), samples, seed)
        denom = samples
    exact = L <= 6
    expected: dict[int, Fraction | float] = {0: 0, S - 1: 0}
    tail: dict[int, dict[int, Fraction | float]] = {}
    if exact:
        exp_t = _solve_rational(K, denom, transient)
        expected.update(exp_t)
        tail.update(_tail_exact(K, denom, transient, {a: 4 * a * L * L for a in tail_a}))
    else:
        idx = np.array(transient)
        Q = K[np.ix_(idx, idx)] / denom
        h = np.linalg.solve(np.eye(len(idx)) - Q, np.ones(len(idx)))
        expected.update({int(s): float(v) for s, v in zip(idx, h)})
        P = K[np.ix_(idx, idx)] / denom
        for a in tail_a:
            t = 4 * a * L * L
            # P[T >= t] from each start = row sums of Q^(t-1)
            v = np.ones(len(idx))
            for _ in range(t - 1):
                v = P @ v
            tail[a] = {int(s): float(x) for s, x in zip(idx, v)}
    return ExactAbsorption(L, exact, expected, tail)


def _solve_rational(K, denom, transient):
    """h = (I - Q)^-1 1 by Gauss-Jordan over Fractions."""
    idx = {s: i for i, s in enumerate(transient)}
    n = len(transient)
    A = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for i, s in enumerate(transient):
        for t in transient:
            A[i][idx[t]] -= Fraction(int(K[s, t]), denom)
        A[i][i] += 1
        A[i][n] = Fraction(1)
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return {s: A[i][n] for i, s in enumerate(transient)}


def _tail_exact(K, denom, transient, horizons: dict[int, int]):
    """P[T >= t] per start for each horizon: survival after t-1 rounds,
    carried in exact integers scaled by denom**(t-1)."""
    Kt = [[(j, int(K[s, u])) for j, u in enumerate(transient) if K[s, u]] for s in transient]
    v = [1] * len(transient)
    want = {t - 1: a for a, t in horizons.items()}
    out = {}
    for k in range(max(want) + 1):
        if k in want:
            scale = denom**k
            out[want[k]] = {s: Fraction(v[i], scale) for i, s in enumerate(transient)}
        v = [sum(w * v[j] for j, w in row) for row in Kt]
    return out


def free_cycle_formula(L: int, polarity=None):
    """2-CNF ring (x1 | ~x2), (x2 | ~x3), ..., (xL | ~x1) with optional
    per-variable polarity flips; it has no pure literal on the cycle."""
    from .formula import Formula

    pol = np.ones(L, dtype=np.int64) if polarity is None else np.where(np.asarray(polarity, dtype=bool), 1, -1)
    clauses = []
    for i in range(L):
        a, b = i + 1, (i + 1) % L + 1
        clauses.append((int(pol[i] * a), int(-pol[(i + 1) % L] * b)))
    return Formula.from_clauses(L, clauses)
