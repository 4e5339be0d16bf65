"""CNF formulas over variables 1..n with clauses of width 1 to 3.

Literals follow the DIMACS convention: ``+v`` is the positive literal of
variable ``v`` and ``-v`` its negation. A formula stores its clauses as an
``(m, 3)`` integer array padded with zeros, which keeps million-clause
instances cheap and lets the message-passing kernels read it directly.

Partial assignments are int8 vectors with ``TRUE = 1``, ``FALSE = -1`` and
``UNASSIGNED = 0``; total assignments are boolean vectors. Entry ``i`` of
either holds the value of variable ``i + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TRUE = 1
FALSE = -1
UNASSIGNED = 0

MAX_WIDTH = 3


class FormulaError(ValueError):
    """Raised for malformed clauses or mismatched dimensions."""


class DimacsError(FormulaError):
    """Raised when DIMACS text cannot be parsed."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Formula:
    """An immutable CNF formula.

    Use :meth:`from_clauses` for validated construction from Python
    sequences. Duplicate clauses are allowed.
    """

    n: int
    lits: np.ndarray  # (m, 3) int32, zero padded
    widths: np.ndarray = field(repr=False)  # (m,) int8

    def __post_init__(self):
        _freeze(self.lits)
        _freeze(self.widths)

    @classmethod
    def from_clauses(cls, n: int, clauses: Iterable[Sequence[int]]) -> "Formula":
        rows = [tuple(int(l) for l in c) for c in clauses]
        lits = np.zeros((len(rows), MAX_WIDTH), dtype=np.int32)
        for j, c in enumerate(rows):
            if not 1 <= len(c) <= MAX_WIDTH:
                raise FormulaError(f"clause {j} has width {len(c)}, expected 1..3")
            lits[j, : len(c)] = c
        return cls.from_array(n, lits)

    @classmethod
    def from_array(cls, n: int, lits: np.ndarray) -> "Formula":
        """Build from a zero-padded ``(m, 3)`` literal array, validating it."""
        if n < 0:
            raise FormulaError("variable count must be non-negative")
        lits = np.array(lits, dtype=np.int32).reshape(-1, MAX_WIDTH)
        nz = lits != 0
        widths = nz.sum(axis=1).astype(np.int8)
        if lits.shape[0] and widths.min() < 1:
            raise FormulaError("empty clause")
        # padding must trail the literals
        if np.any(nz[:, 1:] & ~nz[:, :-1]):
            raise FormulaError("zero literal inside a clause")
        v = np.abs(lits)
        if v.size and v.max() > n:
            raise FormulaError(f"literal out of range for n={n}")
        dup = ((v[:, 0] == v[:, 1]) & nz[:, 1]) | ((v[:, 0] == v[:, 2]) & nz[:, 2]) | (
            (v[:, 1] == v[:, 2]) & nz[:, 2]
        )
        if np.any(dup):
            j = int(np.flatnonzero(dup)[0])
            raise FormulaError(f"clause {j} repeats a variable")
        return cls(int(n), lits, widths)

    @classmethod
    def empty(cls, n: int) -> "Formula":
        return cls(int(n), np.zeros((0, MAX_WIDTH), dtype=np.int32), np.zeros(0, dtype=np.int8))

    @property
    def m(self) -> int:
        return int(self.lits.shape[0])

    def __len__(self) -> int:
        return self.m

    def clause(self, j: int) -> tuple[int, ...]:
        return tuple(int(l) for l in self.lits[j, : self.widths[j]])

    @property
    def clauses(self) -> list[tuple[int, ...]]:
        return [self.clause(j) for j in range(self.m)]

    def __iter__(self):
        return iter(self.clauses)

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.lits, other.lits)

    def __hash__(self):
        return hash((self.n, self.lits.tobytes()))

    def variables(self) -> np.ndarray:
        """Sorted variables that occur in at least one clause."""
        v = np.abs(self.lits[self.lits != 0])
        return np.unique(v)

    def select(self, mask_or_index) -> "Formula":
        """Sub-formula made of the chosen clauses, same variable range."""
        lits = self.lits[mask_or_index]
        return Formula(self.n, np.ascontiguousarray(lits), np.ascontiguousarray(self.widths[mask_or_index]))


def as_partial(values, n: int | None = None) -> np.ndarray:
    """Coerce a partial assignment to an int8 vector in {-1, 0, 1}."""
    a = np.asarray(values)
    if a.dtype == bool:
        a = np.where(a, TRUE, FALSE)
    a = a.astype(np.int8)
    if n is not None and a.shape != (n,):
        raise FormulaError(f"assignment has shape {a.shape}, expected ({n},)")
    if np.any((a < -1) | (a > 1)):
        raise FormulaError("partial assignment values must be in {-1, 0, 1}")
    return a


def literal_values(formula: Formula, psi: np.ndarray) -> np.ndarray:
    """Per-slot literal value under ``psi``: 1 true, -1 false, 0 unassigned or padding."""
    v = np.abs(formula.lits)
    vals = np.zeros(formula.lits.shape, dtype=np.int8)
    nz = v > 0
    vals[nz] = psi[v[nz] - 1] * np.sign(formula.lits[nz]).astype(np.int8)
    return vals


def evaluate(formula: Formula, a) -> bool:
    """True iff the total assignment ``a`` satisfies every clause."""
    a = np.asarray(a)
    if a.shape != (formula.n,):
        raise FormulaError(f"assignment has shape {a.shape}, expected ({formula.n},)")
    if a.dtype != bool:
        if np.any(a == UNASSIGNED):
            raise FormulaError("assignment is not total")
        a = a > 0
    if formula.m == 0:
        return True
    return bool(np.all((literal_values(formula, np.where(a, TRUE, FALSE).astype(np.int8)) > 0).any(axis=1)))


# public alias matching the operation name
eval = evaluate  # noqa: A001


@dataclass(frozen=True)
class Simplified:
    """Result of substituting a partial assignment into a formula.

    ``formula`` keeps the original variable indices. ``empty_clauses`` lists
    the indices of original clauses whose literals were all falsified; the
    formula is unsatisfiable whenever that list is non-empty.
    """

    formula: Formula
    empty_clauses: np.ndarray
    kept: np.ndarray  # original clause index of each remaining clause
    psi: np.ndarray

    @property
    def has_empty_clause(self) -> bool:
        return self.empty_clauses.size > 0

    @property
    def var_map(self) -> dict[int, int]:
        """old -> new index for unassigned variables, in increasing order."""
        free = np.flatnonzero(self.psi == UNASSIGNED) + 1
        return {int(v): i + 1 for i, v in enumerate(free)}

    def compact(self) -> tuple[Formula, dict[int, int]]:
        """Renumber the unassigned variables to 1..k."""
        vm = self.var_map
        lut = np.zeros(self.formula.n + 1, dtype=np.int32)
        for old, new in vm.items():
            lut[old] = new
        l = self.formula.lits
        out = np.sign(l) * lut[np.abs(l)]
        return Formula(len(vm), out.astype(np.int32), self.formula.widths.copy()), vm


def simplify(formula: Formula, psi) -> Simplified:
    """Drop satisfied clauses and false literals under ``psi``."""
    psi = as_partial(psi, formula.n)
    vals = literal_values(formula, psi)
    satisfied = (vals > 0).any(axis=1)
    keep_slot = (formula.lits != 0) & (vals == 0)
    widths = keep_slot.sum(axis=1)
    empty = ~satisfied & (widths == 0)
    remain = ~satisfied & (widths > 0)
    idx = np.flatnonzero(remain)
    sub = formula.lits[idx]
    ks = keep_slot[idx]
    # stable left-compaction of the surviving literals
    order = np.argsort(~ks, axis=1, kind="stable")
    packed = np.take_along_axis(np.where(ks, sub, 0), order, axis=1).astype(np.int32)
    out = Formula(formula.n, packed, widths[idx].astype(np.int8))
    return Simplified(out, np.flatnonzero(empty), idx, _freeze(psi.copy()))


def restrict(formula: Formula, variables) -> Formula:
    """Clauses whose variables all lie in ``variables``."""
    inside = np.zeros(formula.n + 1, dtype=bool)
    vs = np.asarray(sorted(variables) if isinstance(variables, (set, frozenset)) else variables, dtype=np.int64)
    if vs.size and (vs.min() < 1 or vs.max() > formula.n):
        raise FormulaError("variable set out of range")
    inside[vs] = True
    inside[0] = True  # padding
    mask = inside[np.abs(formula.lits)].all(axis=1)
    return formula.select(mask)


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text.

    Comment lines start with ``c``. Clauses may span lines; each ends with
    ``0``. Clause count must match the header.
    """
    header = None
    tokens: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {lineno}: second header")
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {line!r}")
            try:
                header = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: bad header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before header")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise DimacsError(f"line {lineno}: non-integer token") from None
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    n, m = header
    clauses: list[list[int]] = []
    cur: list[int] = []
    for t in tokens:
        if t == 0:
            if not cur:
                raise DimacsError(f"clause {len(clauses) + 1} is empty")
            clauses.append(cur)
            cur = []
        else:
            if abs(t) > n:
                raise DimacsError(f"literal {t} out of range for n={n}")
            if any(abs(t) == abs(u) for u in cur):
                raise DimacsError(f"clause {len(clauses) + 1} repeats variable {abs(t)}")
            cur.append(t)
    if cur:
        raise DimacsError("last clause is not terminated by 0")
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    try:
        return Formula.from_clauses(n, clauses)
    except FormulaError as e:
        raise DimacsError(str(e)) from None


def write_dimacs(formula: Formula, comments: Sequence[str] = ()) -> str:
    """Canonical DIMACS text: optional comments, header, one clause per line."""
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {formula.n} {formula.m}")
    for j in range(formula.m):
        out.append(" ".join(str(l) for l in formula.lits[j, : formula.widths[j]]) + " 0")
    return "\n".join(out) + "\n"


def read_dimacs(path) -> Formula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def save_dimacs(formula: Formula, path, comments: Sequence[str] = ()) -> None:
    with open(path, "w") as fh:
        fh.write(write_dimacs(formula, comments))
