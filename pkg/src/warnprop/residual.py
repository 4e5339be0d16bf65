"""Satisfying what Warning Propagation leaves behind.

The residual formula is split into connected components. Trees are solved
by peeling leaves: a unit clause forces its variable and a variable seen in
a single live clause is set to satisfy it. A unicyclic component is reduced
to a tree by fixing one cycle variable both ways. Multicyclic components
are outside the expected regime; small ones fall back to DPLL.
"""

from __future__ import annotations

import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .factor_graph import ComponentClass, build, components
from .formula import Formula, Simplified, evaluate, simplify
from . import wp as wp_engine

MULTICYCLIC_LIMIT = 25

Clauses = Sequence[Sequence[int]]


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    GAVE_UP = "GAVE_UP"


class NotATree(ValueError):
    pass


class NotUnicyclic(ValueError):
    pass


@dataclass
class SolveOutcome:
    status: Status
    assignment: dict[int, bool] = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


def _clause_list(f) -> list[tuple[int, ...]]:
    if isinstance(f, Formula):
        return f.clauses
    return [tuple(int(l) for l in c) for c in f]


def _cyclomatic(clauses: list[tuple[int, ...]]) -> int:
    """Independent cycles of the factor graph, E - V + #components."""
    parent: dict = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = 0
    for j, c in enumerate(clauses):
        parent.setdefault(("c", j), ("c", j))
        for l in c:
            parent.setdefault(abs(l), abs(l))
    for j, c in enumerate(clauses):
        for l in c:
            edges += 1
            ra, rb = find(("c", j)), find(abs(l))
            if ra != rb:
                parent[ra] = rb
    roots = {find(a) for a in parent}
    return edges - len(parent) + len(roots)


def _peel(clauses: list[tuple[int, ...]], fixed: dict[int, bool]) -> dict[int, bool] | None:
    """Leaf elimination on a forest-shaped formula; None on conflict."""
    value = dict(fixed)
    live = [list(c) for c in clauses]
    alive = [True] * len(live)
    occ: dict[int, set[int]] = defaultdict(set)
    for j, c in enumerate(live):
        for l in c:
            occ[abs(l)].add(j)

    def assign(v: int, b: bool) -> bool:
        value[v] = b
        for j in list(occ[v]):
            if not alive[j]:
                continue
            lit = v if b else -v
            if lit in live[j]:
                kill(j)
            else:
                live[j].remove(-lit)
                occ[v].discard(j)
                if not live[j]:
                    return False
                queue.append(("c", j))
        occ[v].clear()
        return True

    def kill(j: int) -> None:
        alive[j] = False
        for l in live[j]:
            occ[abs(l)].discard(j)
            queue.append(("v", abs(l)))

    queue: deque = deque()
    # variables fixed up front act like unit clauses
    for v, b in fixed.items():
        if v in occ and not assign(v, b):
            return None
    for j, c in enumerate(live):
        if alive[j]:
            if not c:
                return None
            queue.append(("c", j))
    for v in list(occ):
        queue.append(("v", v))
    while queue:
        kind, k = queue.popleft()
        if kind == "c":
            if alive[k] and len(live[k]) == 1:
                l = live[k][0]
                if not assign(abs(l), l > 0):
                    return None
        else:
            if k in value:
                continue
            js = [j for j in occ[k] if alive[j]]
            if len(js) == 1:
                j = js[0]
                l = next(l for l in live[j] if abs(l) == k)
                if not assign(k, l > 0):
                    return None
    if any(alive):
        # only reachable when the input had a cycle
        raise NotATree("leaf elimination stalled on a cycle")
    return value


def solve_tree(component) -> SolveOutcome:
    clauses = _clause_list(component)
    if _cyclomatic(clauses) != 0:
        raise NotATree("factor graph has a cycle")
    if any(len(c) == 0 for c in clauses):
        return SolveOutcome(Status.UNSAT)
    value = _peel(clauses, {})
    if value is None:
        return SolveOutcome(Status.UNSAT)
    value = _complete(clauses, value)
    assert _satisfies(clauses, value)
    return SolveOutcome(Status.SAT, value)


def _cycle_variables(clauses: list[tuple[int, ...]]) -> list[int]:
    """Variables left after repeatedly stripping degree-1 nodes."""
    adj: dict = defaultdict(set)
    for j, c in enumerate(clauses):
        for l in c:
            adj[("c", j)].add(abs(l))
            adj[abs(l)].add(("c", j))
    leaves = deque(a for a, nb in adj.items() if len(nb) <= 1)
    gone = set()
    while leaves:
        a = leaves.popleft()
        if a in gone:
            continue
        gone.add(a)
        for b in adj[a]:
            adj[b].discard(a)
            if len(adj[b]) <= 1 and b not in gone:
                leaves.append(b)
        adj[a] = set()
    return sorted(a for a in adj if a not in gone and not isinstance(a, tuple))


def solve_unicyclic(component) -> SolveOutcome:
    clauses = _clause_list(component)
    if _cyclomatic(clauses) != 1:
        raise NotUnicyclic("factor graph does not have exactly one cycle")
    if any(len(c) == 0 for c in clauses):
        return SolveOutcome(Status.UNSAT)
    x = _cycle_variables(clauses)[0]
    log = []
    for b in (True, False):
        value = _peel(clauses, {x: b})
        log.append({"branch_var": x, "value": b, "sat": value is not None})
        if value is not None:
            value = _complete(clauses, value)
            assert _satisfies(clauses, value)
            return SolveOutcome(Status.SAT, value, log)
    return SolveOutcome(Status.UNSAT, {}, log)


def dpll(clauses: Clauses, limit_vars: int | None = None) -> dict[int, bool] | None:
    """Plain DPLL with unit propagation; returns a model or None."""
    clauses = [tuple(c) for c in clauses]
    vs = sorted({abs(l) for c in clauses for l in c})
    if limit_vars is not None and len(vs) > limit_vars:
        raise ValueError("too many variables for DPLL fallback")

    def go(cs: list[tuple[int, ...]], value: dict[int, bool]):
        while True:
            unit = next((c[0] for c in cs if len(c) == 1), None)
            if unit is None:
                break
            cs = _reduce(cs, unit)
            if cs is None:
                return None
            value = {**value, abs(unit): unit > 0}
        if not cs:
            return value
        v = abs(cs[0][0])
        for lit in (v, -v):
            sub = _reduce(cs, lit)
            if sub is not None:
                r = go(sub, {**value, v: lit > 0})
                if r is not None:
                    return r
        return None

    if any(len(c) == 0 for c in clauses):
        return None
    model = go(clauses, {})
    return None if model is None else _complete(clauses, model)


def _reduce(cs, lit):
    out = []
    for c in cs:
        if lit in c:
            continue
        if -lit in c:
            c = tuple(l for l in c if l != -lit)
            if not c:
                return None
        out.append(c)
    return out


def _complete(clauses, value: dict[int, bool]) -> dict[int, bool]:
    for c in clauses:
        for l in c:
            value.setdefault(abs(l), True)
    return value


def _satisfies(clauses, value: dict[int, bool]) -> bool:
    return all(any(value.get(abs(l)) == (l > 0) for l in c) for c in clauses)


def solve_residual(residual) -> SolveOutcome:
    """Solve a residual formula (or a :class:`Simplified`) component by component."""
    if isinstance(residual, Simplified):
        if residual.has_empty_clause:
            return SolveOutcome(Status.UNSAT, log=[{"reason": "empty clause"}])
        formula = residual.formula
    else:
        formula = residual
    if formula.m == 0:
        return SolveOutcome(Status.SAT)
    value: dict[int, bool] = {}
    log = []
    status = Status.SAT
    for comp in components(build(formula)):
        sub = [formula.clause(int(j)) for j in comp.clauses]
        kind = comp.kind
        entry = {"size": int(comp.variables.size), "edges": comp.edges, "class": kind.value}
        if kind is ComponentClass.TREE:
            out = solve_tree(sub)
        elif kind is ComponentClass.UNICYCLIC:
            out = solve_unicyclic(sub)
        elif comp.variables.size <= MULTICYCLIC_LIMIT:
            model = dpll(sub)
            out = SolveOutcome(Status.SAT, model) if model is not None else SolveOutcome(Status.UNSAT)
            entry["fallback"] = "dpll"
        else:
            out = SolveOutcome(Status.GAVE_UP)
        entry["status"] = out.status.value
        log.append(entry)
        if out.status is Status.SAT:
            value.update(out.assignment)
        elif out.status is Status.UNSAT:
            return SolveOutcome(Status.UNSAT, {}, log)
        else:
            status = Status.GAVE_UP
    return SolveOutcome(status, value if status is Status.SAT else {}, log)


@dataclass
class PipelineReport:
    status: str
    converged: bool
    passes: int
    assigned_fraction: float
    residual_clauses: int
    residual_components: dict
    empty_clause: bool
    satisfies_original: bool
    psi_equals_phi: bool | None = None
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PipelineResult:
    assignment: np.ndarray | None  # bool, length n
    report: PipelineReport
    wp: wp_engine.WPResult
    residual: SolveOutcome | None

    @property
    def success(self) -> bool:
        return self.report.status == "SAT"


def solve_planted(instance, wp_config: wp_engine.WPConfig | None = None) -> PipelineResult:
    """WP, simplify by its partial assignment, solve the rest, verify.

    ``instance`` may be a :class:`PlantedInstance` or a bare formula. Failures
    (no convergence, unsatisfiable or abandoned residual) are reported in the
    returned status rather than raised.
    """
    formula = getattr(instance, "formula", instance)
    planted = getattr(instance, "planted", None)
    times = {}
    t0 = time.perf_counter()
    graph = build(formula)
    r = wp_engine.run(graph, wp_config)
    t1 = time.perf_counter()
    times["wp"] = t1 - t0
    psi = r.assignment
    simp = simplify(formula, psi)
    t2 = time.perf_counter()
    times["simplify"] = t2 - t1
    comp_census = {}
    outcome = None
    full = None
    ok = False
    if not r.converged:
        status = "NO_CONVERGENCE"
    else:
        outcome = solve_residual(simp)
        status = outcome.status.value
        if outcome.status is Status.SAT:
            full = psi > 0
            for v, b in outcome.assignment.items():
                full[v - 1] = b
            free = psi == 0
            touched = np.zeros(formula.n, dtype=bool)
            touched[[v - 1 for v in outcome.assignment]] = True
            full[free & ~touched] = True
            ok = evaluate(formula, full)
            if not ok:
                status = "VERIFY_FAILED"
        kinds = [e.get("class") for e in outcome.log if "class" in e]
        comp_census = {
            "components": len(kinds),
            "tree": kinds.count("tree"),
            "unicyclic": kinds.count("unicyclic"),
            "multicyclic": kinds.count("multicyclic"),
            "max_size": max((e["size"] for e in outcome.log if "size" in e), default=0),
        }
    times["residual"] = time.perf_counter() - t2
    psi_eq = None
    if planted is not None:
        psi_eq = bool(np.array_equal(psi, np.where(planted, 1, -1)))
    report = PipelineReport(
        status=status,
        converged=r.converged,
        passes=r.passes_used,
        assigned_fraction=r.assigned_fraction,
        residual_clauses=simp.formula.m,
        residual_components=comp_census,
        empty_clause=simp.has_empty_clause,
        satisfies_original=bool(ok),
        psi_equals_phi=psi_eq,
        timings=times,
    )
    return PipelineResult(full if ok else None, report, r, outcome)


def brute_force_sat(n: int, clauses: Iterable[Sequence[int]]) -> list[np.ndarray]:
    """Every satisfying assignment of a formula over ``n <= 20`` variables."""
    clauses = [tuple(c) for c in clauses]
    if n > 20:
        raise ValueError("brute force limited to n <= 20")
    bits = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    ok = np.ones(2**n, dtype=bool)
    for c in clauses:
        sat = np.zeros(2**n, dtype=bool)
        for l in c:
            sat |= bits[:, abs(l) - 1] == (1 if l > 0 else 0)
        ok &= sat
    return [row.astype(bool) for row in bits[ok]]
