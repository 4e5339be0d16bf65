"""Planted random 3-SAT instances.

A planted assignment is drawn first; then every 3-clause it satisfies is
kept independently with probability ``p``. Rather than visit all
``7 * C(n, 3)`` candidate clauses, the clause count is drawn from the
matching binomial and that many distinct satisfied clauses are sampled
uniformly by rejection, which gives the same distribution in O(m) time.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .formula import Formula, evaluate


def universe_size(n: int) -> int:
    """Number of distinct 3-clauses satisfied by a fixed assignment."""
    if n < 3:
        raise ValueError("n must be at least 3")
    return 7 * comb(n, 3)


@dataclass(frozen=True)
class GenParams:
    n: int
    p: float | None = None
    d: float | None = None
    seed: int = 0
    all_true: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if (self.p is None) == (self.d is None):
            raise ValueError("give exactly one of p or d")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"clause probability {self.prob} outside [0, 1]")

    @property
    def prob(self) -> float:
        return float(self.p) if self.p is not None else float(self.d) / self.n**2

    @property
    def density(self) -> float:
        """The ``d`` with ``p = d / n**2``."""
        return self.prob * self.n**2


@dataclass(frozen=True)
class PlantedInstance:
    formula: Formula
    planted: np.ndarray  # bool, length n
    params: GenParams | None = None

    @property
    def n(self) -> int:
        return self.formula.n

    def is_consistent(self) -> bool:
        return evaluate(self.formula, self.planted)


def _draw_clauses(rng: np.random.Generator, n: int, phi: np.ndarray, k: int) -> np.ndarray:
    """``k`` distinct phi-satisfied 3-clauses, uniformly, in draw order."""
    keys = np.empty(0, dtype=np.int64)
    seen_first = np.empty(0, dtype=np.int64)  # keys in order of first appearance
    batch = max(64, int(k * 1.05) + 16)
    while seen_first.size < k:
        v = rng.integers(0, n, size=(batch, 3))
        ok = (v[:, 0] != v[:, 1]) & (v[:, 0] != v[:, 2]) & (v[:, 1] != v[:, 2])
        v = np.sort(v[ok], axis=1)
        # bit b set: literal on v[:, b] agrees with phi; pattern 0 would falsify the clause
        pat = rng.integers(1, 8, size=v.shape[0])
        new = ((v[:, 0] * n + v[:, 1]) * n + v[:, 2]) * 8 + pat
        keys = np.concatenate([seen_first, new])
        _, first = np.unique(keys, return_index=True)
        seen_first = keys[np.sort(first)]
        batch = max(64, int((k - seen_first.size) * 1.2) + 16)
    keys = seen_first[:k]
    pat = keys % 8
    rest = keys // 8
    v2 = rest % n
    rest //= n
    v1 = rest % n
    v0 = rest // n
    vs = np.stack([v0, v1, v2], axis=1)
    agree = np.stack([(pat >> b) & 1 for b in range(3)], axis=1).astype(bool)
    positive = np.where(agree, phi[vs], ~phi[vs])
    return np.where(positive, vs + 1, -(vs + 1)).astype(np.int32)


def generate(params: GenParams) -> PlantedInstance:
    rng = np.random.default_rng(params.seed)
    n = params.n
    phi = np.ones(n, dtype=bool) if params.all_true else rng.random(n) < 0.5
    total = universe_size(n)
    k = int(rng.binomial(total, params.prob)) if params.prob < 1.0 else total
    if params.prob >= 1.0 or k > total // 2:
        lits = _enumerate_all(n, phi)
        if k < total:
            lits = lits[rng.choice(total, size=k, replace=False)]
    else:
        lits = _draw_clauses(rng, n, phi, k)
    lits = lits[rng.permutation(lits.shape[0])]
    return PlantedInstance(Formula.from_array(n, lits), phi, params)


def _enumerate_all(n: int, phi: np.ndarray) -> np.ndarray:
    """Every phi-satisfied clause; only viable for small n."""
    from itertools import combinations

    rows = []
    for trip in combinations(range(n), 3):
        for pat in range(1, 8):
            rows.append(
                [(t + 1) if (phi[t] if (pat >> b) & 1 else not phi[t]) else -(t + 1) for b, t in enumerate(trip)]
            )
    return np.asarray(rows, dtype=np.int32).reshape(-1, 3)
