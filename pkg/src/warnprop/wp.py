"""Warning Propagation with sequential, randomly ordered updates.

Only clause-to-variable messages are stored (one uint8 per edge). The
variable-to-clause message ``x -> C`` is recomputed on demand as the running
bias of ``x`` minus the contribution of ``C`` itself, so every update inside
a pass sees the values written earlier in the same pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .factor_graph import FactorGraph, build
from .formula import Formula

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure Python fallback

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _bias(n, edge_var, edge_sign, msg):
    b = np.zeros(n + 1, dtype=np.int64)
    for e in range(edge_var.size):
        b[edge_var[e]] += edge_sign[e] * msg[e]
    return b


@njit(cache=True)
def _clause_value(e, clause_ptr, edge_clause, edge_var, edge_sign, msg, bias):
    j = edge_clause[e]
    for f in range(clause_ptr[j], clause_ptr[j + 1]):
        if f == e:
            continue
        s = edge_sign[f]
        v2c = bias[edge_var[f]] - s * msg[f]
        # positive literal needs x->C < 0, negative literal needs x->C > 0
        if s * v2c >= 0:
            return 0
    return 1


@njit(cache=True)
def _run_pass(order, clause_ptr, edge_clause, edge_var, edge_sign, msg, bias):
    changed = 0
    for k in range(order.size):
        e = order[k]
        new = _clause_value(e, clause_ptr, edge_clause, edge_var, edge_sign, msg, bias)
        old = msg[e]
        if new != old:
            msg[e] = new
            bias[edge_var[e]] += edge_sign[e] * (np.int64(new) - np.int64(old))
            changed += 1
    return changed


@njit(cache=True)
def _recompute_all(clause_ptr, edge_clause, edge_var, edge_sign, msg, bias):
    out = np.empty(msg.size, dtype=np.uint8)
    for e in range(msg.size):
        out[e] = _clause_value(e, clause_ptr, edge_clause, edge_var, edge_sign, msg, bias)
    return out


def _as_graph(g) -> FactorGraph:
    return g if isinstance(g, FactorGraph) else build(g)


def init_messages(graph: FactorGraph, rng: np.random.Generator) -> np.ndarray:
    """Independent fair bits, one per clause-to-variable edge."""
    return rng.integers(0, 2, size=graph.num_edges, dtype=np.uint8)


def compute_bias(graph: FactorGraph, state) -> np.ndarray:
    """Signed warning balance per variable, indexed 1..n (entry 0 is 0)."""
    msg = np.asarray(state, dtype=np.uint8)
    return _bias(graph.n, graph.edge_var, graph.edge_sign.astype(np.int64), msg)


def assignment_from_bias(bias) -> np.ndarray:
    """Partial assignment from biases: sign of B_i, length n."""
    return np.sign(np.asarray(bias)[1:]).astype(np.int8)


def var_to_clause(graph: FactorGraph, x: int, j: int, state) -> int:
    """Message from variable ``x`` to clause ``j`` under stored warnings."""
    e = graph.edge_lookup(j, x)
    msg = np.asarray(state, dtype=np.int64)
    own = graph.edges_of_var(x)
    total = int(np.sum(graph.edge_sign[own].astype(np.int64) * msg[own]))
    return total - int(graph.edge_sign[e]) * int(msg[e])


def clause_to_var_value(graph: FactorGraph, j: int, x: int, state) -> int:
    """Recomputed warning ``C_j -> x`` from the other literals' messages."""
    e = graph.edge_lookup(j, x)
    for f in graph.edges_of_clause(j):
        if f == e:
            continue
        y = int(graph.edge_var[f])
        s = int(graph.edge_sign[f])
        if s * var_to_clause(graph, y, j, state) >= 0:
            return 0
    return 1


def run_pass(graph: FactorGraph, state: np.ndarray, order) -> tuple[np.ndarray, int]:
    """One sweep over the edges in ``order``; returns (new state, changes).

    The input vector is left untouched.
    """
    msg = np.array(state, dtype=np.uint8)
    sign = graph.edge_sign.astype(np.int64)
    bias = _bias(graph.n, graph.edge_var, sign, msg)
    changed = _run_pass(np.asarray(order, dtype=np.int64), graph.clause_ptr, graph.edge_clause, graph.edge_var, sign, msg, bias)
    return msg, int(changed)


def is_fixed_point(formula_or_graph, state) -> bool:
    """Whether recomputing every warning from ``state`` reproduces it."""
    graph = _as_graph(formula_or_graph)
    msg = np.asarray(state, dtype=np.uint8)
    sign = graph.edge_sign.astype(np.int64)
    bias = _bias(graph.n, graph.edge_var, sign, msg)
    again = _recompute_all(graph.clause_ptr, graph.edge_clause, graph.edge_var, sign, msg, bias)
    return bool(np.array_equal(again, msg))


def default_max_passes(n: int) -> int:
    return max(100, math.ceil(20 * math.log2(max(n, 2))))


@dataclass(frozen=True)
class WPConfig:
    seed: int = 0
    max_passes: int | None = None
    record_history: bool = False

    def __post_init__(self):
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")

    def passes_for(self, n: int) -> int:
        return self.max_passes if self.max_passes is not None else default_max_passes(n)


@dataclass(frozen=True)
class WPResult:
    converged: bool
    passes_used: int
    final_messages: np.ndarray
    bias: np.ndarray  # indexed 1..n
    assignment: np.ndarray  # partial, length n
    changes: list[int] = field(default_factory=list)
    history: list[np.ndarray] | None = field(default=None, repr=False)
    orders: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def assigned_fraction(self) -> float:
        a = self.assignment
        return float(np.count_nonzero(a)) / a.size if a.size else 1.0


class WarningPropagation:
    """Stateful driver for a single run; :func:`run` wraps it.

    The RNG stream is consumed as: initial messages, then one edge
    permutation per pass.
    """

    def __init__(self, formula_or_graph, seed: int = 0, messages=None):
        self.graph = _as_graph(formula_or_graph)
        self.rng = np.random.default_rng(seed)
        g = self.graph
        self._sign = g.edge_sign.astype(np.int64)
        init = init_messages(g, self.rng)
        self.messages = init if messages is None else np.array(messages, dtype=np.uint8)
        self.initial = self.messages.copy()
        self.bias = _bias(g.n, g.edge_var, self._sign, self.messages)
        self.passes = 0

    def next_order(self) -> np.ndarray:
        return self.rng.permutation(self.graph.num_edges)

    def step(self, order=None) -> int:
        """Run one pass (fresh random order unless given); returns the change count."""
        if order is None:
            order = self.next_order()
        g = self.graph
        changed = _run_pass(
            np.asarray(order, dtype=np.int64), g.clause_ptr, g.edge_clause, g.edge_var, self._sign, self.messages, self.bias
        )
        self.passes += 1
        return int(changed)

    def partial_assignment(self) -> np.ndarray:
        return assignment_from_bias(self.bias)


def run(formula_or_graph, config: WPConfig | None = None) -> WPResult:
    config = config or WPConfig()
    wp = WarningPropagation(formula_or_graph, config.seed)
    limit = config.passes_for(wp.graph.n)
    history = [wp.messages.copy()] if config.record_history else None
    orders = [] if config.record_history else None
    changes = []
    converged = False
    for _ in range(limit):
        order = wp.next_order()
        c = wp.step(order)
        changes.append(c)
        if history is not None:
            history.append(wp.messages.copy())
            orders.append(order)
        if c == 0:
            converged = True
            break
    return WPResult(
        converged=converged,
        passes_used=wp.passes,
        final_messages=wp.messages.copy(),
        bias=wp.bias.copy(),
        assignment=wp.partial_assignment(),
        changes=changes,
        history=history,
        orders=orders,
    )
