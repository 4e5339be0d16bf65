"""Clause/variable incidence structure of a CNF formula.

Edges are the clause slots of the formula in clause order, so edge ``e``
joins clause ``edge_clause[e]`` and variable ``edge_var[e]`` (1-based) with
polarity ``edge_sign[e]``. Edges of clause ``j`` are
``clause_ptr[j]:clause_ptr[j+1]``; edges of variable ``v`` are
``var_edges[var_ptr[v]:var_ptr[v+1]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .formula import Formula, as_partial, literal_values


@dataclass(frozen=True, eq=False)
class FactorGraph:
    formula: Formula
    clause_ptr: np.ndarray
    edge_clause: np.ndarray
    edge_var: np.ndarray
    edge_sign: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray

    @property
    def n(self) -> int:
        return self.formula.n

    @property
    def m(self) -> int:
        return self.formula.m

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.size)

    def edges_of_var(self, v: int) -> np.ndarray:
        return self.var_edges[self.var_ptr[v] : self.var_ptr[v + 1]]

    def edges_of_clause(self, j: int) -> np.ndarray:
        return np.arange(self.clause_ptr[j], self.clause_ptr[j + 1])

    def pos_clauses(self, v: int) -> np.ndarray:
        """N+(v): clauses where ``v`` occurs positively."""
        e = self.edges_of_var(v)
        return self.edge_clause[e[self.edge_sign[e] > 0]]

    def neg_clauses(self, v: int) -> np.ndarray:
        """N-(v): clauses where ``v`` occurs negatively."""
        e = self.edges_of_var(v)
        return self.edge_clause[e[self.edge_sign[e] < 0]]

    def pos_vars(self, j: int) -> np.ndarray:
        e = self.edges_of_clause(j)
        return self.edge_var[e[self.edge_sign[e] > 0]]

    def neg_vars(self, j: int) -> np.ndarray:
        e = self.edges_of_clause(j)
        return self.edge_var[e[self.edge_sign[e] < 0]]

    def degree(self) -> np.ndarray:
        """Occurrences per variable, indexed 1..n (entry 0 unused)."""
        return np.diff(self.var_ptr)

    def edge_lookup(self, j: int, v: int) -> int:
        for e in self.edges_of_clause(j):
            if self.edge_var[e] == v:
                return int(e)
        raise KeyError(f"variable {v} does not occur in clause {j}")


def build(formula: Formula) -> FactorGraph:
    widths = formula.widths.astype(np.int64)
    clause_ptr = np.zeros(formula.m + 1, dtype=np.int64)
    np.cumsum(widths, out=clause_ptr[1:])
    mask = formula.lits != 0
    lits = formula.lits[mask]  # row-major keeps clause order
    edge_var = np.abs(lits).astype(np.int64)
    edge_sign = np.sign(lits).astype(np.int8)
    edge_clause = np.repeat(np.arange(formula.m, dtype=np.int64), widths)
    counts = np.bincount(edge_var, minlength=formula.n + 1)
    var_ptr = np.zeros(formula.n + 2, dtype=np.int64)
    np.cumsum(counts, out=var_ptr[1:])
    var_edges = np.argsort(edge_var, kind="stable").astype(np.int64)
    arrays = (clause_ptr, edge_clause, edge_var, edge_sign, var_ptr, var_edges)
    for a in arrays:
        a.setflags(write=False)
    return FactorGraph(formula, *arrays)


class ComponentClass(str, Enum):
    TREE = "tree"
    UNICYCLIC = "unicyclic"
    MULTICYCLIC = "multicyclic"


@dataclass(frozen=True)
class Component:
    variables: np.ndarray  # 1-based
    clauses: np.ndarray
    edges: int

    @property
    def nodes(self) -> int:
        return int(self.variables.size + self.clauses.size)

    @property
    def kind(self) -> ComponentClass:
        if self.edges == self.nodes - 1:
            return ComponentClass.TREE
        if self.edges == self.nodes:
            return ComponentClass.UNICYCLIC
        return ComponentClass.MULTICYCLIC

    def to_dict(self) -> dict:
        return {
            "size": int(self.variables.size),
            "clauses": int(self.clauses.size),
            "nodes": self.nodes,
            "edges": self.edges,
            "class": self.kind.value,
        }


def components(graph: FactorGraph) -> list[Component]:
    """Connected components over non-isolated nodes, largest first."""
    n, m = graph.n, graph.m
    if m == 0:
        return []
    # node ids: variables 0..n-1, clauses n..n+m-1
    rows = graph.edge_var - 1
    cols = graph.edge_clause + n
    size = n + m
    adj = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(size, size))
    _, label = connected_components(adj, directed=False)
    var_label = label[:n]
    clause_label = label[n:]
    used_vars = np.diff(graph.var_ptr)[1 : n + 1] > 0
    edge_label = clause_label[graph.edge_clause]
    ecount = np.bincount(edge_label, minlength=size)
    labels = np.unique(clause_label)
    v_order = np.argsort(var_label, kind="stable")
    v_sorted = var_label[v_order]
    c_order = np.argsort(clause_label, kind="stable")
    c_sorted = clause_label[c_order]
    v_lo, v_hi = np.searchsorted(v_sorted, labels), np.searchsorted(v_sorted, labels, "right")
    c_lo, c_hi = np.searchsorted(c_sorted, labels), np.searchsorted(c_sorted, labels, "right")
    out = []
    for i, lab in enumerate(labels):
        vs = v_order[v_lo[i] : v_hi[i]]
        vs = vs[used_vars[vs]] + 1
        out.append(Component(np.sort(vs), np.sort(c_order[c_lo[i] : c_hi[i]]), int(ecount[lab])))
    out.sort(key=lambda c: (-c.nodes, int(c.clauses[0])))
    return out


def census(comps: list[Component]) -> dict:
    """Summary counts for a component list."""
    kinds = [c.kind for c in comps]
    return {
        "components": len(comps),
        "tree": sum(k is ComponentClass.TREE for k in kinds),
        "unicyclic": sum(k is ComponentClass.UNICYCLIC for k in kinds),
        "multicyclic": sum(k is ComponentClass.MULTICYCLIC for k in kinds),
        "max_size": max((int(c.variables.size) for c in comps), default=0),
    }


def support_of(x: int, psi, formula: Formula) -> set[int]:
    """Clauses that ``x`` supports under the partial assignment ``psi``.

    ``x`` supports ``C`` when its literal is the only true one in ``C`` and
    every other variable of ``C`` is assigned.
    """
    psi = as_partial(psi, formula.n)
    vals = literal_values(formula, psi)
    v = np.abs(formula.lits)
    has_x = (v == x).any(axis=1)
    x_true = ((v == x) & (vals > 0)).any(axis=1)
    others = (v != x) & (v != 0)
    ok = has_x & x_true & ~((vals > 0) & others).any(axis=1) & ~((vals == 0) & others).any(axis=1)
    return set(int(j) for j in np.flatnonzero(ok))


class EdgeKind:
    """Edge classes relative to a reference assignment."""

    SUPPORT = 0  # literal true under phi and the only true literal
    AGREE = 1  # literal true under phi, clause also satisfied elsewhere (N++)
    DISAGREE = 2  # literal false under phi (N-)


@dataclass(frozen=True)
class OccurrenceIndex:
    """Per-edge and per-variable occurrence classes relative to ``phi``.

    For ``phi(x) = TRUE`` the agreeing occurrences are the positive ones; for
    ``phi(x) = FALSE`` the roles of the polarities are mirrored.
    """

    edge_kind: np.ndarray  # int8 per edge
    n_support: np.ndarray  # indexed 1..n
    n_agree: np.ndarray  # N++ sizes
    n_disagree: np.ndarray  # N- sizes

    @classmethod
    def build(cls, graph: FactorGraph, phi) -> "OccurrenceIndex":
        phi = np.asarray(phi, dtype=bool)
        f = graph.formula
        true_lit = literal_values(f, np.where(phi, 1, -1).astype(np.int8)) > 0
        n_true = true_lit.sum(axis=1)
        slot_true = true_lit[f.lits != 0]
        sole = n_true[graph.edge_clause] == 1
        kind = np.where(slot_true, np.where(sole, EdgeKind.SUPPORT, EdgeKind.AGREE), EdgeKind.DISAGREE).astype(np.int8)
        size = graph.n + 1
        counts = [np.bincount(graph.edge_var[kind == k], minlength=size) for k in range(3)]
        for a in (kind, *counts):
            a.setflags(write=False)
        return cls(kind, *counts)

    def support_clauses(self, graph: FactorGraph, x: int) -> np.ndarray:
        e = graph.edges_of_var(x)
        return graph.edge_clause[e[self.edge_kind[e] == EdgeKind.SUPPORT]]
