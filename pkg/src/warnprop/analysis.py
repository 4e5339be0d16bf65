"""Core-variable diagnostics for planted instances.

Everything here is computed relative to the planted assignment ``phi``, an
edge order ``order`` (a permutation of clause-to-variable edge ids, edge
``order[i]`` visited at step ``i``) and a 0/1 message vector ``alpha``.
Threshold tests compare integers against ``d`` scaled by the threshold's
denominator, so ``count < d/3`` is evaluated as ``3 * count < d`` exactly.

The solving pipeline never looks at any of this; it exists to check the
behaviour of Warning Propagation against the structure it is expected to
exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .factor_graph import EdgeKind, FactorGraph, OccurrenceIndex, build
from .formula import Formula, restrict, simplify


@dataclass(frozen=True)
class StabilityParams:
    d: Fraction
    support_min: Fraction = field(init=False)
    gap: Fraction = field(init=False)
    core_support_min: Fraction = field(init=False)
    warn_min: Fraction = field(init=False)

    def __init__(self, d):
        d = Fraction(d).limit_denominator(10**9) if isinstance(d, float) else Fraction(d)
        if d <= 0:
            raise ValueError("d must be positive")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "support_min", d / 3)
        object.__setattr__(self, "gap", d / 30)
        object.__setattr__(self, "core_support_min", d / 4)
        object.__setattr__(self, "warn_min", d / 7)

    @classmethod
    def for_instance(cls, instance) -> "StabilityParams":
        params = getattr(instance, "params", None)
        if params is None:
            raise ValueError("instance carries no generation parameters; pass d explicitly")
        return cls(params.density)


def _lt(counts: np.ndarray, bound: Fraction) -> np.ndarray:
    """Exact ``counts < bound`` for integer counts."""
    return counts * bound.denominator < bound.numerator


def _gt(counts: np.ndarray, bound: Fraction) -> np.ndarray:
    return counts * bound.denominator > bound.numerator


@dataclass(frozen=True)
class _Context:
    graph: FactorGraph
    occ: OccurrenceIndex
    phi: np.ndarray


def _context(instance) -> _Context:
    graph = build(instance.formula)
    return _Context(graph, OccurrenceIndex.build(graph, instance.planted), np.asarray(instance.planted, dtype=bool))


def _mask_to_set(mask: np.ndarray) -> set[int]:
    return set(int(v) for v in np.flatnonzero(mask))


def support_deficient(instance, params: StabilityParams) -> set[int]:
    """Variables supporting fewer than d/3 clauses under phi."""
    ctx = _context(instance)
    bad = _lt(ctx.occ.n_support, params.support_min)
    bad[0] = False
    return _mask_to_set(bad)


def _prefix_balance(graph: FactorGraph, kind: np.ndarray, order: np.ndarray, weight: np.ndarray):
    """Per edge ``e = C -> x``: for each other edge ``f = C -> y`` of the same
    clause, the signed count (N++ minus N-, weighted) of edges into ``y``
    strictly earlier than ``e`` in ``order``.

    Returns ``(src, other, balance)`` aligned arrays over (e, f) pairs.
    """
    E = graph.num_edges
    pos = np.empty(E, dtype=np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(E)
    w = np.where(kind == EdgeKind.AGREE, 1, np.where(kind == EdgeKind.DISAGREE, -1, 0)) * weight
    # edges sorted by (variable, position); running sums within each variable
    key = graph.edge_var * (E + 1) + pos
    srt = np.argsort(key, kind="stable")
    csum = np.concatenate([[0], np.cumsum(w[srt])])
    skey = key[srt]
    # (e, f) pairs within each clause
    widths = np.diff(graph.clause_ptr)
    src, other = [], []
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            ok = widths > max(a, b)
            src.append(graph.clause_ptr[:-1][ok] + a)
            other.append(graph.clause_ptr[:-1][ok] + b)
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    other = np.concatenate(other) if other else np.empty(0, dtype=np.int64)
    y = graph.edge_var[other]
    lo = np.searchsorted(skey, y * (E + 1))  # first edge of y
    hi = np.searchsorted(skey, y * (E + 1) + pos[src])  # first edge of y at or after e's position
    balance = csum[hi] - csum[lo]
    return src, other, balance


def _flag_vars(graph: FactorGraph, src: np.ndarray, bad_pair: np.ndarray) -> np.ndarray:
    flag = np.zeros(graph.n + 1, dtype=bool)
    flag[graph.edge_var[src[bad_pair]]] = True
    return flag


def _unstable_mask(ctx: _Context, order, params: StabilityParams) -> np.ndarray:
    g, occ = ctx.graph, ctx.occ
    ones = np.ones(g.num_edges, dtype=np.int64)
    src, other, bal = _prefix_balance(g, occ.edge_kind, order, ones)
    y = g.edge_var[other]
    static = np.abs(occ.n_agree - occ.n_disagree)
    bad_y = _gt(static, params.gap) | _lt(occ.n_support, params.support_min)
    bad = _gt(np.abs(bal), params.gap) | bad_y[y]
    return _flag_vars(g, src, bad)


def unstable(instance, order, params: StabilityParams) -> set[int]:
    """Variables that are not stable with respect to ``order``."""
    return _mask_to_set(_unstable_mask(_context(instance), order, params))


def _violated_mask(ctx: _Context, order, alpha, params: StabilityParams, stable: np.ndarray) -> np.ndarray:
    g, occ = ctx.graph, ctx.occ
    a = np.asarray(alpha, dtype=np.int64)
    src, other, bal = _prefix_balance(g, occ.edge_kind, order, a)
    y = g.edge_var[other]
    size = g.n + 1
    on = a == 1
    agree1 = np.bincount(g.edge_var[on & (occ.edge_kind == EdgeKind.AGREE)], minlength=size)
    dis1 = np.bincount(g.edge_var[on & (occ.edge_kind == EdgeKind.DISAGREE)], minlength=size)
    sup1 = np.bincount(g.edge_var[on & (occ.edge_kind == EdgeKind.SUPPORT)], minlength=size)
    bad_y = _gt(np.abs(agree1 - dis1), params.gap) | _lt(sup1, params.warn_min)
    bad = _gt(np.abs(bal), params.gap) | bad_y[y]
    return _flag_vars(g, src, bad) & stable


def violated(instance, order, alpha, params: StabilityParams) -> set[int]:
    """Stable variables violated by the message vector ``alpha``."""
    ctx = _context(instance)
    stable = ~_unstable_mask(ctx, order, params)
    stable[0] = False
    return _mask_to_set(_violated_mask(ctx, order, alpha, params, stable))


@dataclass
class CoreReport:
    core: set[int]
    a1: set[int]
    a2: set[int]
    a3: set[int]
    trace: list[tuple[int, str]]  # (variable, "support" | "external") in removal order
    n: int = 0

    @property
    def h0(self) -> set[int]:
        return set(range(1, self.n + 1)) - self.a1 - self.a2 - self.a3

    @property
    def fraction(self) -> float:
        return len(self.core) / self.n if self.n else 1.0

    def summary(self) -> dict:
        return {
            "n": self.n,
            "core": len(self.core),
            "core_fraction": self.fraction,
            "support_deficient": len(self.a1),
            "unstable": len(self.a2),
            "violated": len(self.a3),
            "removed_iteratively": len(self.trace),
        }


def peel_core(graph: FactorGraph, occ: OccurrenceIndex, start: np.ndarray, params: StabilityParams, scan=None):
    """Shrink ``start`` (bool mask over 0..n) until every member supports at
    least d/4 clauses inside it and meets at most d/30 clauses leaving it.

    ``scan`` optionally fixes the order in which candidates are examined;
    the result does not depend on it.
    """
    inside = start.copy()
    inside[0] = False
    n = graph.n
    edge_in = inside[graph.edge_var]
    outside_count = np.bincount(graph.edge_clause[~edge_in], minlength=graph.m)
    clause_full = outside_count == 0
    sup_in = np.bincount(
        graph.edge_var[(occ.edge_kind == EdgeKind.SUPPORT) & clause_full[graph.edge_clause]], minlength=n + 1
    )
    ext = np.bincount(graph.edge_var[~clause_full[graph.edge_clause]], minlength=n + 1)

    def reason(v):
        if _lt(np.array([sup_in[v]]), params.core_support_min)[0]:
            return "support"
        if _gt(np.array([ext[v]]), params.gap)[0]:
            return "external"
        return None

    cand = np.flatnonzero(inside)
    if scan is not None:
        cand = cand[np.argsort(np.asarray(scan)[cand], kind="stable")]
    stack = list(cand[::-1])
    trace = []
    ev, ec, ek = graph.edge_var, graph.edge_clause, occ.edge_kind
    cp = graph.clause_ptr
    while stack:
        v = int(stack.pop())
        if not inside[v]:
            continue
        r = reason(v)
        if r is None:
            continue
        inside[v] = False
        trace.append((v, r))
        for e in graph.edges_of_var(v):
            j = ec[e]
            outside_count[j] += 1
            if outside_count[j] != 1:
                continue
            # clause just left F[H]
            for f in range(cp[j], cp[j + 1]):
                w = ev[f]
                ext[w] += 1
                if ek[f] == EdgeKind.SUPPORT:
                    sup_in[w] -= 1
                if inside[w]:
                    stack.append(w)
    return inside, trace


def core(instance, order, alpha, params: StabilityParams, scan=None) -> CoreReport:
    """The iteratively peeled core for ``(instance, order, alpha)``."""
    ctx = _context(instance)
    g = ctx.graph
    a1 = _lt(ctx.occ.n_support, params.support_min)
    a2 = _unstable_mask(ctx, order, params)
    a1[0] = a2[0] = False
    a3 = _violated_mask(ctx, order, alpha, params, ~a2)
    a3[0] = False
    h0 = ~(a1 | a2 | a3)
    h0[0] = False
    inside, trace = peel_core(g, ctx.occ, h0, params, scan)
    return CoreReport(_mask_to_set(inside), _mask_to_set(a1), _mask_to_set(a2), _mask_to_set(a3), trace, g.n)


def correct_message(clause, x: int, phi) -> int:
    """1 iff ``x`` is the only literal of ``clause`` satisfied by ``phi``."""
    phi = np.asarray(phi, dtype=bool)
    lits = [int(l) for l in clause]
    if not any(abs(l) == x for l in lits):
        raise ValueError(f"variable {x} not in clause {lits}")
    true = [l for l in lits if phi[abs(l) - 1] == (l > 0)]
    return int(len(true) == 1 and abs(true[0]) == x)


def correct_messages(graph: FactorGraph, phi) -> np.ndarray:
    """Vectorised :func:`correct_message` for every edge."""
    occ = OccurrenceIndex.build(graph, phi)
    return (occ.edge_kind == EdgeKind.SUPPORT).astype(np.uint8)


def core_edges(graph: FactorGraph, core_vars) -> np.ndarray:
    """Mask of edges ``C -> x`` with ``C`` in F[core] (so ``x`` is in the core too)."""
    inside = np.zeros(graph.n + 1, dtype=bool)
    inside[np.fromiter(core_vars, dtype=np.int64)] = True
    out = np.bincount(graph.edge_clause[~inside[graph.edge_var]], minlength=graph.m)
    return (out == 0)[graph.edge_clause]


def density_count(formula: Formula, U) -> int:
    """Clauses with at least two variables in ``U``."""
    inside = np.zeros(formula.n + 1, dtype=bool)
    u = np.fromiter(U, dtype=np.int64)
    inside[u] = True
    inside[0] = False
    return int(np.count_nonzero(inside[np.abs(formula.lits)].sum(axis=1) >= 2))


def noncore_formula(instance, core_vars) -> Formula:
    """The formula left after fixing core variables to their planted values."""
    psi = np.zeros(instance.formula.n, dtype=np.int8)
    idx = np.fromiter(core_vars, dtype=np.int64) - 1
    psi[idx] = np.where(np.asarray(instance.planted)[idx], 1, -1)
    return simplify(instance.formula, psi).formula


def core_subformula(instance, core_vars) -> Formula:
    return restrict(instance.formula, core_vars)
