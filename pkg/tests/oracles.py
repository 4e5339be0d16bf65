"""Independent reference implementations used only by the tests."""

from itertools import product

import numpy as np


def models(n, clauses):
    """All satisfying assignments (tuples of bools) by plain enumeration."""
    out = []
    for bits in product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            out.append(bits)
    return out


def satisfiable(n, clauses):
    return bool(models(n, clauses))


def num_satisfied(bits, clauses):
    return sum(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses)


def strict_local_maxima(n, clauses):
    """Assignments where flipping any single variable loses a clause."""
    out = []
    for bits in product((False, True), repeat=n):
        base = num_satisfied(bits, clauses)
        ok = True
        for i in range(n):
            flipped = list(bits)
            flipped[i] = not flipped[i]
            if num_satisfied(flipped, clauses) >= base:
                ok = False
                break
        if ok:
            out.append(bits)
    return out


def cycle_rank_dfs(clauses):
    """Independent cycles of the factor multigraph via DFS back-edge count.

    Nodes: ('v', x) and ('c', j). Each clause slot is one edge; an edge is a
    back edge when it reaches an already visited node other than through the
    edge we arrived by.
    """
    adj = {}
    for j, c in enumerate(clauses):
        for k, l in enumerate(c):
            eid = (j, k)
            adj.setdefault(("c", j), []).append((("v", abs(l)), eid))
            adj.setdefault(("v", abs(l)), []).append((("c", j), eid))
    seen = set()
    used = set()
    back = 0
    for root in adj:
        if root in seen:
            continue
        seen.add(root)
        stack = [root]
        while stack:
            u = stack.pop()
            for w, eid in adj[u]:
                if eid in used:
                    continue
                used.add(eid)
                if w in seen:
                    back += 1
                else:
                    seen.add(w)
                    stack.append(w)
    return back


def random_formula(rng, n, m, widths=(1, 2, 3)):
    clauses = []
    for _ in range(m):
        w = int(rng.choice(widths))
        w = min(w, n)
        vs = rng.choice(n, size=w, replace=False) + 1
        clauses.append(tuple(int(v) if rng.random() < 0.5 else -int(v) for v in vs))
    return clauses


def random_tree_formula(rng, n_max=12, unit_prob=0.15):
    """Random formula whose factor graph is a tree (connected)."""
    nvars = 1
    clauses = []
    while True:
        room = n_max - nvars
        if room <= 0 or (clauses and rng.random() < 0.15):
            break
        anchor = int(rng.integers(1, nvars + 1))
        if rng.random() < unit_prob:
            clauses.append((anchor if rng.random() < 0.5 else -anchor,))
            continue
        k = int(rng.integers(1, min(2, room) + 1))
        new = list(range(nvars + 1, nvars + 1 + k))
        nvars += k
        vs = [anchor] + new
        rng.shuffle(vs)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    if not clauses:
        clauses.append((1,))
    return nvars, clauses


def random_unicyclic_formula(rng, n_max=12):
    """A tree formula plus one clause joining two of its variables."""
    while True:
        n, clauses = random_tree_formula(rng, n_max - 1, unit_prob=0.1)
        if n >= 2:
            break
    a, b = (int(x) for x in rng.choice(np.arange(1, n + 1), size=2, replace=False))
    vs = [a, b]
    if n < n_max and rng.random() < 0.5:
        n += 1
        vs.append(n)
    clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return n, clauses


def wp_pass_reference(clauses, msg, order):
    """Plain sequential WP pass over edges numbered clause by clause, slot by slot.

    Returns (new messages, number of changed entries).
    """
    msg = list(msg)
    edges = [(j, k) for j, c in enumerate(clauses) for k in range(len(c))]
    index = {e: i for i, e in enumerate(edges)}

    def var_msg(v, j):
        total = 0
        for jj, c in enumerate(clauses):
            if jj == j:
                continue
            for k, l in enumerate(c):
                if abs(l) == v:
                    total += (1 if l > 0 else -1) * msg[index[(jj, k)]]
        return total

    changed = 0
    for i in order:
        j, k = edges[i]
        c = clauses[j]
        val = 1
        for kk, l in enumerate(c):
            if kk == k:
                continue
            h = var_msg(abs(l), j)
            if not ((l > 0 and h < 0) or (l < 0 and h > 0)):
                val = 0
                break
        if val != msg[i]:
            changed += 1
            msg[i] = val
    return msg, changed


def _edge_table(clauses, phi):
    """(clause, var, kind) per edge in clause/slot order; kind in {'s', '++', '-'}."""
    rows = []
    for j, c in enumerate(clauses):
        true = [phi[abs(l) - 1] == (l > 0) for l in c]
        for l, t in zip(c, true):
            kind = ("s" if sum(true) == 1 else "++") if t else "-"
            rows.append((j, abs(l), kind))
    return rows


def flagged_by_definition(clauses, phi, order, d, alpha=None):
    """Variables failing the stability conditions (alpha None) or the
    violation conditions (alpha given), straight from the definitions with
    exact rationals and quadratic loops."""
    from fractions import Fraction

    d = Fraction(d)
    gap = d / 30
    floor = d / 3 if alpha is None else d / 7
    rows = _edge_table(clauses, phi)
    w = [1] * len(rows) if alpha is None else [int(a) for a in alpha]
    pos = {e: i for i, e in enumerate(order)}
    flagged = set()
    for e, (j, x, _) in enumerate(rows):
        for f, (jf, y, _) in enumerate(rows):
            if jf != j or f == e:
                continue
            into_y = [g for g, r in enumerate(rows) if r[1] == y]
            before = [g for g in into_y if pos[g] < pos[e]]
            pp = sum(w[g] for g in before if rows[g][2] == "++")
            mm = sum(w[g] for g in before if rows[g][2] == "-")
            tp = sum(w[g] for g in into_y if rows[g][2] == "++")
            tm = sum(w[g] for g in into_y if rows[g][2] == "-")
            sup = sum(w[g] for g in into_y if rows[g][2] == "s")
            if abs(pp - mm) > gap or abs(tp - tm) > gap or sup < floor:
                flagged.add(x)
    return flagged


def peel_by_definition(clauses, phi, start, d):
    """Remove the smallest offending variable until none offends."""
    from fractions import Fraction

    d = Fraction(d)
    H = set(start)
    while True:
        inside = [c for c in clauses if all(abs(l) in H for l in c)]
        bad = None
        for v in sorted(H):
            sup = sum(
                1
                for c in inside
                if any(abs(l) == v and phi[v - 1] == (l > 0) for l in c)
                and sum(phi[abs(l) - 1] == (l > 0) for l in c) == 1
            )
            ext = sum(1 for c in clauses if any(abs(l) == v for l in c) and not all(abs(l) in H for l in c))
            if sup < d / 4 or ext > d / 30:
                bad = v
                break
        if bad is None:
            return H
        H.remove(bad)
