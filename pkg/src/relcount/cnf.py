"""CNF formulas with projection sets, DIMACS parsing and emission.

Literals are DIMACS-style signed ints: +v is the variable v, -v its negation.
Variable ids run from 1 to num_vars. The projection set names the variables
that count: model counts and enumerated assignments range over projection
variables only, everything else is auxiliary.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

Clause = Tuple[int, ...]


class DimacsError(ValueError):
    """Raised for malformed DIMACS text; message carries the line number."""


def _check_clause(lits: Sequence[int], num_vars: int) -> Clause:
    seen = set()
    for lit in lits:
        if lit == 0 or abs(lit) > num_vars:
            raise ValueError("literal %d out of range for %d variables" % (lit, num_vars))
        if -lit in seen:
            raise ValueError("tautological clause %s" % (tuple(lits),))
        if lit in seen:
            raise ValueError("duplicate literal %d in clause %s" % (lit, tuple(lits)))
        seen.add(lit)
    return tuple(lits)


@dataclass(frozen=True)
class CnfFormula:
    """Immutable CNF with an explicit projection set.

    clauses may be empty (the formula is then a tautology over its variables)
    and a clause may be empty (the formula is then unsatisfiable).
    """

    num_vars: int
    clauses: Tuple[Clause, ...]
    projection: frozenset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be >= 0")
        object.__setattr__(self, "clauses",
                           tuple(_check_clause(cl, self.num_vars) for cl in self.clauses))
        proj = self.projection
        if proj is None:
            proj = frozenset(range(1, self.num_vars + 1))
        else:
            proj = frozenset(proj)
            if any(v < 1 or v > self.num_vars for v in proj):
                raise ValueError("projection variable out of range")
        object.__setattr__(self, "projection", proj)

    @property
    def has_aux(self) -> bool:
        return len(self.projection) != self.num_vars


def cnf(num_vars: int, clauses: Iterable[Sequence[int]], projection=None) -> CnfFormula:
    return CnfFormula(num_vars, tuple(tuple(cl) for cl in clauses), projection)


def conjoin(f1: CnfFormula, f2: CnfFormula) -> CnfFormula:
    """Conjunction of two formulas that agree on shared variable ids.

    Callers are responsible for id alignment; see metrics for the mapping of
    decision-tree features onto a formula's projection variables.
    """
    return CnfFormula(max(f1.num_vars, f2.num_vars),
                      f1.clauses + f2.clauses,
                      f1.projection | f2.projection)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.

    Comment lines of the form "c ind v1 v2 ... 0" declare projection
    variables (union over all such lines); other comments are ignored.
    Raises DimacsError with a 1-based line number on malformed input.
    """
    num_vars = None
    num_clauses = None
    ind_vars: List[int] = []
    saw_ind = False
    clauses: List[Clause] = []
    pending: List[int] = []
    pending_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            fields = line.split()
            if len(fields) >= 2 and fields[1] == "ind":
                try:
                    vals = [int(tok) for tok in fields[2:]]
                except ValueError:
                    raise DimacsError("line %d: bad projection line %r" % (lineno, raw))
                if not vals or vals[-1] != 0 or any(v <= 0 for v in vals[:-1]):
                    raise DimacsError("line %d: bad projection line %r" % (lineno, raw))
                saw_ind = True
                ind_vars.extend(vals[:-1])
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("line %d: duplicate header" % lineno)
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError("line %d: malformed header %r" % (lineno, raw))
            try:
                num_vars, num_clauses = int(fields[2]), int(fields[3])
            except ValueError:
                raise DimacsError("line %d: malformed header %r" % (lineno, raw))
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("line %d: malformed header %r" % (lineno, raw))
            continue
        if num_vars is None:
            raise DimacsError("line %d: clause before header" % lineno)
        try:
            toks = [int(tok) for tok in line.split()]
        except ValueError:
            raise DimacsError("line %d: bad literal in %r" % (lineno, raw))
        for lit in toks:
            if lit == 0:
                try:
                    clauses.append(_check_clause(pending, num_vars))
                except ValueError as exc:
                    raise DimacsError("line %d: %s" % (lineno, exc))
                pending = []
            else:
                if not pending:
                    pending_line = lineno
                if abs(lit) > num_vars:
                    raise DimacsError("line %d: literal %d out of range" % (lineno, lit))
                pending.append(lit)

    if num_vars is None:
        raise DimacsError("line 1: missing header")
    if pending:
        raise DimacsError("line %d: unterminated clause" % pending_line)
    if len(clauses) != num_clauses:
        raise DimacsError("line 1: header declares %d clauses, found %d"
                          % (num_clauses, len(clauses)))
    for v in ind_vars:
        if v > num_vars:
            raise DimacsError("line 1: projection variable %d out of range" % v)
    projection = frozenset(ind_vars) if saw_ind else None
    return CnfFormula(num_vars, tuple(clauses), projection)


def emit_dimacs(f: CnfFormula) -> str:
    """Canonical DIMACS text; parse_dimacs(emit_dimacs(f)) == f.

    A single "c ind ... 0" line (ascending variable ids) is written only when
    the projection is a proper subset of the variables.
    """
    out = ["p cnf %d %d\n" % (f.num_vars, len(f.clauses))]
    if f.has_aux:
        out.append("c ind %s0\n" % "".join("%d " % v for v in sorted(f.projection)))
    for cl in f.clauses:
        out.append("%s0\n" % "".join("%d " % lit for lit in cl))
    return "".join(out)
