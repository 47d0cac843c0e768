"""Relational properties of binary relations on a bounded domain.

A relation over a domain of size n is an n x n adjacency matrix, stored
row-major: cell (s, t) says whether s relates to t, and maps to CNF variable
s*n + t + 1 (0-based s, t). encode() produces a CNF whose projected solutions
are exactly the matrices satisfying the property; evaluate() is the direct
Boolean definition, kept independent of the clause generators so the two can
be checked against each other exhaustively.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Sequence

import numpy as np

from .cnf import Clause, CnfFormula


class Property(Enum):
    ANTISYMMETRIC = "antisymmetric"
    BIJECTIVE = "bijective"
    CONNEX = "connex"
    EQUIVALENCE = "equivalence"
    FUNCTION = "function"
    FUNCTIONAL = "functional"
    INJECTIVE = "injective"
    IRREFLEXIVE = "irreflexive"
    NONSTRICTORDER = "nonstrictorder"
    PARTIALORDER = "partialorder"
    PREORDER = "preorder"
    REFLEXIVE = "reflexive"
    STRICTORDER = "strictorder"
    SURJECTIVE = "surjective"
    TOTALORDER = "totalorder"
    TRANSITIVE = "transitive"


PROPERTY_NAMES = tuple(p.value for p in Property)


def lookup(name: str) -> Property:
    key = name.lower().replace("-", "").replace("_", "")
    for prop in Property:
        if prop.value == key:
            return prop
    raise ValueError("unknown property %r (choose from %s)"
                     % (name, ", ".join(p.value for p in Property)))


@dataclass(frozen=True)
class PropertySpec:
    property: Property
    scope: int

    def __post_init__(self):
        if self.scope < 1:
            raise ValueError("scope must be >= 1")


def var(s: int, t: int, n: int) -> int:
    return s * n + t + 1


# ---------------------------------------------------------------------------
# clause generators

def _reflexive(n) -> List[Clause]:
    return [(var(s, s, n),) for s in range(n)]


def _irreflexive(n) -> List[Clause]:
    return [(-var(s, s, n),) for s in range(n)]


def _antisymmetric(n) -> List[Clause]:
    return [(-var(s, t, n), -var(t, s, n))
            for s in range(n) for t in range(s + 1, n)]


def _connex(n) -> List[Clause]:
    out: List[Clause] = []
    for s in range(n):
        for t in range(s, n):
            if s == t:
                out.append((var(s, s, n),))
            else:
                out.append((var(s, t, n), var(t, s, n)))
    return out


def _symmetric(n) -> List[Clause]:
    return [(-var(s, t, n), var(t, s, n))
            for s in range(n) for t in range(n) if s != t]


def _transitive(n, distinct_only: bool = False) -> List[Clause]:
    # s == t and t == u both yield tautologies, so those index combinations
    # are skipped; remaining triples produce pairwise distinct clauses, the
    # seen-set is belt and braces
    out: List[Clause] = []
    seen = set()
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            for u in range(n):
                if t == u or (distinct_only and s == u):
                    continue
                cl = (-var(s, t, n), -var(t, u, n), var(s, u, n))
                if cl not in seen:
                    seen.add(cl)
                    out.append(cl)
    return out


def _row_at_least_one(n) -> List[Clause]:
    return [tuple(var(s, t, n) for t in range(n)) for s in range(n)]


def _row_at_most_one(n) -> List[Clause]:
    return [(-var(s, t, n), -var(s, u, n))
            for s in range(n) for t in range(n) for u in range(t + 1, n)]


def _col_at_least_one(n) -> List[Clause]:
    return [tuple(var(s, t, n) for s in range(n)) for t in range(n)]


def _col_at_most_one(n) -> List[Clause]:
    return [(-var(s, t, n), -var(u, t, n))
            for t in range(n) for s in range(n) for u in range(s + 1, n)]


def encode(spec: PropertySpec) -> CnfFormula:
    """CNF over exactly n^2 variables, all of them projected."""
    n = spec.scope
    p = spec.property
    P = Property
    if p is P.ANTISYMMETRIC:
        cls = _antisymmetric(n)
    elif p is P.BIJECTIVE:
        cls = (_row_at_least_one(n) + _row_at_most_one(n)
               + _col_at_least_one(n) + _col_at_most_one(n))
    elif p is P.CONNEX:
        cls = _connex(n)
    elif p is P.EQUIVALENCE:
        cls = _reflexive(n) + _symmetric(n) + _transitive(n)
    elif p is P.FUNCTION:
        cls = _row_at_least_one(n) + _row_at_most_one(n)
    elif p is P.FUNCTIONAL:
        cls = _row_at_most_one(n)
    elif p is P.INJECTIVE:
        cls = _col_at_least_one(n) + _col_at_most_one(n)
    elif p is P.IRREFLEXIVE:
        cls = _irreflexive(n)
    elif p is P.NONSTRICTORDER:
        cls = _reflexive(n) + _antisymmetric(n) + _transitive(n)
    elif p is P.PARTIALORDER:
        cls = _antisymmetric(n) + _transitive(n, distinct_only=True)
    elif p is P.PREORDER:
        cls = _reflexive(n) + _transitive(n)
    elif p is P.REFLEXIVE:
        cls = _reflexive(n)
    elif p is P.STRICTORDER:
        cls = _irreflexive(n) + _transitive(n)
    elif p is P.SURJECTIVE:
        cls = _col_at_least_one(n)
    elif p is P.TOTALORDER:
        cls = _transitive(n) + _antisymmetric(n) + _connex(n)
    elif p is P.TRANSITIVE:
        cls = _transitive(n)
    else:  # pragma: no cover
        raise ValueError("unhandled property %r" % p)
    return CnfFormula(n * n, tuple(cls))


# ---------------------------------------------------------------------------
# direct evaluation (independent of the encoders)

def evaluate(prop: Property, bits: Sequence[int], n: int) -> bool:
    """Truth of the property on one matrix, straight from the definition."""
    if len(bits) != n * n:
        raise ValueError("expected %d cells, got %d" % (n * n, len(bits)))

    def m(s, t):
        return bool(bits[s * n + t])

    def reflexive():
        return all(m(s, s) for s in range(n))

    def irreflexive():
        return not any(m(s, s) for s in range(n))

    def symmetric():
        return all(m(t, s) for s in range(n) for t in range(n)
                   if s != t and m(s, t))

    def antisymmetric():
        return not any(m(s, t) and m(t, s)
                       for s in range(n) for t in range(s + 1, n))

    def connex():
        return all(m(s, t) or m(t, s) for s in range(n) for t in range(s, n))

    def transitive(distinct_only=False):
        for s in range(n):
            for t in range(n):
                if not m(s, t):
                    continue
                for u in range(n):
                    if distinct_only and (s == t or t == u or s == u):
                        continue
                    if m(t, u) and not m(s, u):
                        return False
        return True

    def rows_exactly_one():
        return all(sum(bits[s * n:(s + 1) * n]) == 1 for s in range(n))

    def rows_at_most_one():
        return all(sum(bits[s * n:(s + 1) * n]) <= 1 for s in range(n))

    def cols(t):
        return sum(bits[s * n + t] for s in range(n))

    P = Property
    if prop is P.ANTISYMMETRIC:
        return antisymmetric()
    if prop is P.BIJECTIVE:
        return rows_exactly_one() and all(cols(t) == 1 for t in range(n))
    if prop is P.CONNEX:
        return connex()
    if prop is P.EQUIVALENCE:
        return reflexive() and symmetric() and transitive()
    if prop is P.FUNCTION:
        return rows_exactly_one()
    if prop is P.FUNCTIONAL:
        return rows_at_most_one()
    if prop is P.INJECTIVE:
        return all(cols(t) == 1 for t in range(n))
    if prop is P.IRREFLEXIVE:
        return irreflexive()
    if prop is P.NONSTRICTORDER:
        return reflexive() and antisymmetric() and transitive()
    if prop is P.PARTIALORDER:
        return antisymmetric() and transitive(distinct_only=True)
    if prop is P.PREORDER:
        return reflexive() and transitive()
    if prop is P.REFLEXIVE:
        return reflexive()
    if prop is P.STRICTORDER:
        return irreflexive() and transitive()
    if prop is P.SURJECTIVE:
        return all(cols(t) >= 1 for t in range(n))
    if prop is P.TOTALORDER:
        return transitive() and antisymmetric() and connex()
    if prop is P.TRANSITIVE:
        return transitive()
    raise ValueError("unhandled property %r" % prop)  # pragma: no cover


def evaluate_batch(prop: Property, X: np.ndarray, n: int) -> np.ndarray:
    """Vectorized evaluate over rows of X, shape (m, n*n). Used for bulk
    dataset work; agreement with evaluate() is part of the test suite."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != n * n:
        raise ValueError("expected shape (m, %d), got %s" % (n * n, X.shape))
    R = X.reshape(-1, n, n).astype(bool)
    Rt = R.transpose(0, 2, 1)
    idx = np.arange(n)
    diag = R[:, idx, idx]

    def reflexive():
        return diag.all(axis=1)

    def irreflexive():
        return ~diag.any(axis=1)

    def symmetric():
        return (~R | Rt).all(axis=(1, 2))

    def antisymmetric():
        both = R & Rt
        both[:, idx, idx] = False
        return ~both.any(axis=(1, 2))

    def connex():
        return (R | Rt).all(axis=(1, 2))

    def transitive():
        paths = R.astype(np.uint8) @ R.astype(np.uint8)
        return ~((paths > 0) & ~R).any(axis=(1, 2))

    def transitive_distinct():
        R0 = R.copy()
        R0[:, idx, idx] = False
        paths = R0.astype(np.uint8) @ R0.astype(np.uint8)
        viol = (paths > 0) & ~R0
        viol[:, idx, idx] = False
        return ~viol.any(axis=(1, 2))

    def row_sums():
        return R.sum(axis=2)

    def col_sums():
        return R.sum(axis=1)

    P = Property
    if prop is P.ANTISYMMETRIC:
        return antisymmetric()
    if prop is P.BIJECTIVE:
        return (row_sums() == 1).all(axis=1) & (col_sums() == 1).all(axis=1)
    if prop is P.CONNEX:
        return connex()
    if prop is P.EQUIVALENCE:
        return reflexive() & symmetric() & transitive()
    if prop is P.FUNCTION:
        return (row_sums() == 1).all(axis=1)
    if prop is P.FUNCTIONAL:
        return (row_sums() <= 1).all(axis=1)
    if prop is P.INJECTIVE:
        return (col_sums() == 1).all(axis=1)
    if prop is P.IRREFLEXIVE:
        return irreflexive()
    if prop is P.NONSTRICTORDER:
        return reflexive() & antisymmetric() & transitive()
    if prop is P.PARTIALORDER:
        return antisymmetric() & transitive_distinct()
    if prop is P.PREORDER:
        return reflexive() & transitive()
    if prop is P.REFLEXIVE:
        return reflexive()
    if prop is P.STRICTORDER:
        return irreflexive() & transitive()
    if prop is P.SURJECTIVE:
        return (col_sums() >= 1).all(axis=1)
    if prop is P.TOTALORDER:
        return transitive() & antisymmetric() & connex()
    if prop is P.TRANSITIVE:
        return transitive()
    raise ValueError("unhandled property %r" % prop)  # pragma: no cover


# ---------------------------------------------------------------------------
# symmetry breaking

def lex_leader_symbreak(n: int) -> CnfFormula:
    """Lex-leader constraint over the matrix variables: the matrix must
    compare lexicographically <= its image under every transposition of
    adjacent domain atoms. Sound for counting distinct structures (it keeps
    at least one representative per isomorphism class, since the class's
    lex-least member survives every permutation test) but deliberately
    partial: it does not cut every class down to one member.

    Auxiliary chain variables track prefix equality; only the n^2 matrix
    variables are projected.
    """
    nv = n * n
    clauses: List[Clause] = []
    aux = nv
    for s in range(n - 1):
        perm = list(range(n))
        perm[s], perm[s + 1] = perm[s + 1], perm[s]
        pairs = []
        for i in range(n):
            for j in range(n):
                a = var(i, j, n)
                b = var(perm[i], perm[j], n)
                if a != b:
                    pairs.append((a, b))
        prev = 0
        for k, (a, b) in enumerate(pairs):
            if prev == 0:
                clauses.append((-a, b))
            else:
                clauses.append((-prev, -a, b))
            if k == len(pairs) - 1:
                break
            aux += 1
            e = aux
            if prev == 0:
                # e <-> (a == b)
                clauses += [(-e, -a, b), (-e, a, -b), (e, a, b), (e, -a, -b)]
            else:
                # e <-> prev and (a == b)
                clauses += [(-e, prev), (-e, -a, b), (-e, a, -b),
                            (-prev, -a, -b, e), (-prev, a, b, e)]
            prev = e
    return CnfFormula(aux, tuple(clauses), projection=range(1, nv + 1))


def matrix_leq_under_swaps(bits: Sequence[int], n: int) -> bool:
    """Direct check of the lex-leader condition, used as an oracle for the
    CNF above."""
    for s in range(n - 1):
        perm = list(range(n))
        perm[s], perm[s + 1] = perm[s + 1], perm[s]
        for i in range(n):
            for j in range(n):
                a = bits[i * n + j]
                b = bits[perm[i] * n + perm[j]]
                if a != b:
                    if a > b:
                        return False
                    break
            else:
                continue
            break
    return True
