"""Projected model counting: exact, brute-force, and approximate.

All counters report the number of assignments to the projection variables
that extend to a full satisfying assignment. The exact counter is a DPLL-style
search with connected-component decomposition and memoized component counts;
the brute-force counter sweeps the whole space and exists as an independent
oracle for the exact one; the approximate counter is the usual XOR-hashing
(epsilon, delta) scheme. Counts are arbitrary-precision ints throughout.
"""

import itertools
import math
import random
import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .cnf import Clause, CnfFormula
from .sat import Solver

DEFAULT_TIMEOUT = 5000.0

# total clause tuples the component memo may hold before shedding old entries
_CACHE_LOAD_CAP = 8_000_000


@dataclass
class CountResult:
    count: Optional[int]
    mode: str
    elapsed: float
    timed_out: bool = False
    epsilon: Optional[float] = None
    delta: Optional[float] = None


class EnumerationIncomplete(Exception):
    """Solution enumeration hit its time budget; carries the partial count."""

    def __init__(self, count_so_far: int):
        super().__init__("enumeration incomplete after %d solutions" % count_so_far)
        self.count_so_far = count_so_far


class _OutOfTime(Exception):
    pass


class _Budget:
    """Deadline checked every few thousand search steps."""

    __slots__ = ("deadline", "ticks")

    def __init__(self, timeout: Optional[float]):
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.ticks = 0

    def tick(self):
        self.ticks += 1
        if self.deadline is not None and (self.ticks & 2047) == 0:
            if time.monotonic() > self.deadline:
                raise _OutOfTime()


def _decision_order(f: CnfFormula) -> List[int]:
    proj = sorted(f.projection)
    aux = [v for v in range(1, f.num_vars + 1) if v not in f.projection]
    return proj + aux


def is_sat(f: CnfFormula, assumptions: Sequence[int] = ()) -> bool:
    return Solver(f.num_vars, f.clauses).solve(assumptions)


def enumerate_solutions(f: CnfFormula, limit: Optional[int] = None
                        ) -> Iterator[Dict[int, bool]]:
    """Yield distinct projected assignments by repeated solving, blocking
    each found assignment over the projection variables. Order is
    deterministic (ascending-variable, false-first decisions)."""
    proj = sorted(f.projection)
    solver = Solver(f.num_vars, f.clauses, order=_decision_order(f))
    n = 0
    while limit is None or n < limit:
        if not solver.solve():
            return
        model = {v: solver.model_bit(v) for v in proj}
        yield model
        n += 1
        if not proj:
            return
        solver.add_clause([-v if model[v] else v for v in proj])


def _reduce(clauses, assumption: Dict[int, bool]):
    """Remove satisfied clauses and false literals, propagating units to a
    fixpoint. Returns (reduced clauses, all assignments made) or None on
    conflict."""
    assign = dict(assumption)
    cur = clauses
    while True:
        out = []
        changed = False
        for cl in cur:
            if not cl:
                return None
            newlits = None
            sat = False
            for i, lit in enumerate(cl):
                a = assign.get(lit if lit > 0 else -lit)
                if a is None:
                    if newlits is not None:
                        newlits.append(lit)
                elif a == (lit > 0):
                    sat = True
                    break
                else:
                    if newlits is None:
                        newlits = list(cl[:i])
            if sat:
                continue
            if newlits is None:
                out.append(cl)
                continue
            if not newlits:
                return None
            if len(newlits) == 1:
                lit = newlits[0]
                v, val = abs(lit), lit > 0
                prev = assign.get(v)
                if prev is None:
                    assign[v] = val
                    changed = True
                elif prev != val:
                    return None
            else:
                out.append(tuple(newlits))
        if not changed:
            return out, assign
        cur = out


def _components(clauses) -> List[list]:
    """Partition clauses into variable-disjoint connected components."""
    parent: Dict[int, int] = {}

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for cl in clauses:
        first = abs(cl[0])
        if first not in parent:
            parent[first] = first
        r0 = find(first)
        for lit in cl[1:]:
            v = abs(lit)
            if v not in parent:
                parent[v] = r0
            else:
                parent[find(v)] = r0
    groups: Dict[int, list] = {}
    for cl in clauses:
        groups.setdefault(find(abs(cl[0])), []).append(cl)
    return list(groups.values())


class _ComponentCache:
    """Memo of component signature -> projected count, bounded by the total
    number of clause tuples held; sheds the oldest half when full."""

    def __init__(self, load_cap: int = _CACHE_LOAD_CAP):
        self.data: dict = {}
        self.load = 0
        self.load_cap = load_cap

    def get(self, key):
        return self.data.get(key)

    def put(self, key, value):
        if key in self.data:
            return
        if self.load >= self.load_cap:
            for k in list(itertools.islice(self.data.keys(), len(self.data) // 2 + 1)):
                self.load -= len(k)
                del self.data[k]
        self.data[key] = value
        self.load += len(key)


class _ExactCounter:
    def __init__(self, f: CnfFormula, budget: _Budget,
                 cache: Optional[_ComponentCache] = None):
        self.num_vars = f.num_vars
        self.is_proj = bytearray(f.num_vars + 1)
        for v in f.projection:
            self.is_proj[v] = 1
        self.budget = budget
        self.cache = cache if cache is not None else _ComponentCache()

    def count(self, f: CnfFormula) -> int:
        red = _reduce(list(f.clauses), {})
        if red is None:
            return 0
        clauses, assigned = red
        covered = set()
        for cl in clauses:
            for lit in cl:
                covered.add(abs(lit))
        free = 0
        for v in f.projection:
            if v not in assigned and v not in covered:
                free += 1
        return self._count_list(clauses) << free

    def _count_list(self, clauses) -> int:
        if not clauses:
            return 1
        comps = _components(clauses)
        if len(comps) == 1:
            return self._count_component(comps[0])
        result = 1
        for comp in comps:
            c = self._count_component(comp)
            if c == 0:
                return 0
            result *= c
        return result

    def _count_component(self, comp) -> int:
        key = frozenset(comp)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        self.budget.tick()
        occ: Dict[int, int] = {}
        for cl in comp:
            for lit in cl:
                v = abs(lit)
                occ[v] = occ.get(v, 0) + 1
        branch = 0
        branch_occ = -1
        is_proj = self.is_proj
        for v, c in occ.items():
            if is_proj[v] and (c > branch_occ or (c == branch_occ and v < branch)):
                branch, branch_occ = v, c
        if branch == 0:
            # auxiliary-only component: contributes 1 or 0
            result = 1 if Solver(self.num_vars, comp, order=sorted(occ)).solve() else 0
        else:
            result = 0
            for phase in (False, True):
                red = _reduce(comp, {branch: phase})
                if red is None:
                    continue
                newclauses, assigned = red
                newvars = set()
                for cl in newclauses:
                    for lit in cl:
                        newvars.add(abs(lit))
                freed = 0
                for v in occ:
                    if is_proj[v] and v not in assigned and v not in newvars:
                        freed += 1
                result += self._count_list(newclauses) << freed
        self.cache.put(key, result)
        return result


def count_exact(f: CnfFormula, timeout: Optional[float] = DEFAULT_TIMEOUT,
                _cache: Optional[_ComponentCache] = None) -> CountResult:
    """Exact projected count. Branches only on projection variables; residual
    auxiliary components contribute a satisfiability bit. On timeout the
    result carries no count and is flagged."""
    t0 = time.monotonic()
    budget = _Budget(timeout)
    try:
        n = _ExactCounter(f, budget, _cache).count(f)
        return CountResult(n, "exact", time.monotonic() - t0)
    except _OutOfTime:
        return CountResult(None, "exact", time.monotonic() - t0, timed_out=True)


def count_bruteforce(f: CnfFormula, max_proj_vars: int = 26) -> CountResult:
    """Independent oracle: sweep assignments exhaustively and count projected
    solutions. Refuses projections wider than max_proj_vars."""
    proj = sorted(f.projection)
    if len(proj) > max_proj_vars:
        raise ValueError("refusing brute force over %d projection variables (limit %d)"
                         % (len(proj), max_proj_vars))
    t0 = time.monotonic()
    if f.num_vars <= max(24, len(proj)) and f.num_vars <= 26:
        count = _brute_sweep(f, proj)
    else:
        # many auxiliary variables: one assumption solve per projected point
        solver = Solver(f.num_vars, f.clauses)
        count = 0
        for bits in itertools.product((False, True), repeat=len(proj)):
            assumptions = [v if b else -v for v, b in zip(proj, bits)]
            if solver.solve(assumptions):
                count += 1
    return CountResult(count, "brute", time.monotonic() - t0)


def _brute_sweep(f: CnfFormula, proj: List[int]) -> int:
    nv = f.num_vars
    total = 1 << nv
    has_aux = f.has_aux
    chunk = 1 << 20
    count = 0
    seen = set()
    shifts = np.array([v - 1 for v in proj], dtype=np.uint64) if has_aux else None
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.uint64)
        ok = np.ones(len(idx), dtype=bool)
        for cl in f.clauses:
            sat = np.zeros(len(idx), dtype=bool)
            for lit in cl:
                bit = (idx >> np.uint64(abs(lit) - 1)) & np.uint64(1)
                sat |= (bit == 1) if lit > 0 else (bit == 0)
            ok &= sat
            if not ok.any():
                break
        if not ok.any():
            continue
        if not has_aux:
            count += int(ok.sum())
        else:
            sel = idx[ok]
            bits = ((sel[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
            packed = np.packbits(bits, axis=1)
            seen.update(row.tobytes() for row in packed)
    return len(seen) if has_aux else count


# ---------------------------------------------------------------------------
# bulk enumeration into arrays (dataset generation backend)

def solutions_array(f: CnfFormula, timeout: Optional[float] = None) -> np.ndarray:
    """All projected solutions as a (m, |projection|) uint8 array, columns in
    ascending variable order, rows sorted lexicographically.

    Explores the projection space depth-first; variables that drop out of all
    active clauses are expanded in bulk, so solution clouds with free
    variables cost far less than their cardinality. Raises
    EnumerationIncomplete on timeout with the count gathered so far.
    """
    proj = sorted(f.projection)
    col = {v: i for i, v in enumerate(proj)}
    k = len(proj)
    budget = _Budget(timeout)
    num_vars = f.num_vars
    blocks: List[np.ndarray] = []
    done = 0

    def emit(env: Dict[int, bool], active):
        nonlocal done
        free = [v for v in proj if v not in env]
        # residual clauses are auxiliary-only here
        if active and not Solver(num_vars, active, order=sorted(
                {abs(lit) for cl in active for lit in cl})).solve():
            return
        template = np.zeros(k, dtype=np.uint8)
        for v, b in env.items():
            if v in col:
                template[col[v]] = 1 if b else 0
        nf = len(free)
        block = np.broadcast_to(template, (1 << nf, k)).copy()
        for j, v in enumerate(sorted(free)):
            pattern = (np.arange(1 << nf, dtype=np.uint32) >> (nf - 1 - j)) & 1
            block[:, col[v]] = pattern.astype(np.uint8)
        blocks.append(block)
        done += 1 << nf

    def rec(clauses, env: Dict[int, bool]):
        budget.tick()
        branch = 0
        for cl in clauses:
            for lit in cl:
                v = abs(lit)
                if v in col and (branch == 0 or v < branch):
                    branch = v
        if branch == 0:
            emit(env, clauses)
            return
        for phase in (False, True):
            red = _reduce(clauses, {branch: phase})
            if red is None:
                continue
            newclauses, assigned = red
            newenv = dict(env)
            newenv.update(assigned)
            rec(newclauses, newenv)

    red = _reduce(list(f.clauses), {})
    if red is not None:
        clauses, assigned = red
        try:
            rec(clauses, assigned)
        except _OutOfTime:
            raise EnumerationIncomplete(done)
    if not blocks:
        return np.zeros((0, k), dtype=np.uint8)
    arr = np.concatenate(blocks, axis=0) if len(blocks) > 1 else blocks[0]
    return arr[_row_order(arr)]


def _row_order(arr: np.ndarray) -> np.ndarray:
    packed = np.packbits(arr, axis=1)
    view = np.ascontiguousarray(packed).view(
        [("", "V%d" % packed.shape[1])]).ravel()
    return np.argsort(view, kind="stable")


# ---------------------------------------------------------------------------
# approximate counting with random XOR parity constraints

def _xor_cnf(subset: List[int], rhs: int, aux_base: int) -> Tuple[List[Clause], int]:
    """CNF for parity(subset) == rhs, chaining fresh auxiliaries from
    aux_base. Returns (clauses, number of auxiliaries used)."""
    if not subset:
        return ([()] if rhs else []), 0
    cur = subset[0]
    clauses: List[Clause] = []
    nxt = aux_base
    for v in subset[1:]:
        a = nxt
        nxt += 1
        # a <-> cur xor v
        clauses += [(-a, cur, v), (-a, -cur, -v), (a, -cur, v), (a, cur, -v)]
        cur = a
    clauses.append((cur,) if rhs else (-cur,))
    return clauses, nxt - aux_base


def _approx_reps(delta: float) -> int:
    """Smallest odd repetition count whose median beats delta, assuming the
    standard per-round failure bound of 0.36."""
    t = 1
    while True:
        fail = sum(math.comb(t, k) * 0.36 ** k * 0.64 ** (t - k)
                   for k in range((t + 1) // 2, t + 1))
        if fail <= delta:
            return t
        t += 2


def count_approx(f: CnfFormula, epsilon: float = 0.8, delta: float = 0.2,
                 seed: int = 0, timeout: Optional[float] = DEFAULT_TIMEOUT,
                 exact_attempt: float = 2.0) -> CountResult:
    """(epsilon, delta) projected count estimate.

    Random XOR parity constraints over the projection halve the solution set
    per level; surviving solutions are enumerated up to a pivot and scaled by
    2^levels, with the median taken over enough repetitions to reach the
    requested confidence. All randomness comes from the seed.

    An exact answer is the best possible estimate, so up to `exact_attempt`
    seconds are first spent trying to solve the instance exactly; the parity
    machinery only runs when that attempt gives up. Pass 0 to skip the
    attempt and force the randomized path.
    """
    if epsilon <= 0 or not 0 < delta < 1:
        raise ValueError("need epsilon > 0 and 0 < delta < 1")
    t0 = time.monotonic()
    budget = _Budget(timeout)
    proj = sorted(f.projection)
    pivot = 1 + math.ceil(9.84 * (1 + epsilon / (1 + epsilon)) * (1 + 1 / epsilon) ** 2)

    def finish(value):
        return CountResult(value, "approx", time.monotonic() - t0,
                           epsilon=epsilon, delta=delta)

    if exact_attempt > 0:
        share = exact_attempt
        if timeout is not None:
            share = min(share, timeout / 2.0)
        r = count_exact(f, timeout=share)
        if not r.timed_out and r.count is not None:
            return finish(r.count)

    try:
        base = _count_up_to(f, f.clauses, proj, pivot, f.num_vars, budget)
        if base < pivot:
            return finish(base)
        rng = random.Random(seed)
        reps = _approx_reps(delta)
        estimates = []
        prev_m = 1
        for _ in range(reps):
            rows: List[Tuple[List[int], int]] = []

            def row(i):
                while len(rows) <= i:
                    subset = [v for v in proj if rng.getrandbits(1)]
                    rows.append((subset, rng.getrandbits(1)))
                return rows[i]

            memo: Dict[int, int] = {0: pivot}

            def cnt(m):
                if m in memo:
                    return memo[m]
                clauses = list(f.clauses)
                nv = f.num_vars
                for i in range(m):
                    subset, rhs = row(i)
                    xcl, used = _xor_cnf(subset, rhs, nv + 1)
                    clauses += xcl
                    nv += used
                memo[m] = _count_up_to(f, clauses, proj, pivot, nv, budget)
                return memo[m]

            # the previous repetition's level is usually within a step of
            # this one's; walk down from it when it overshoots, otherwise
            # gallop up and binary search the first level where the survivor
            # count drops below the pivot
            hi = len(proj)
            m = max(1, min(prev_m, hi))
            if cnt(m) < pivot:
                while m > 1 and cnt(m - 1) < pivot:
                    m -= 1
                c = cnt(m)
                estimates.append((c if c > 0 else pivot >> 1) << m)
                prev_m = m
                continue
            lo = m
            m = min(hi, m * 2)
            while m < hi and cnt(m) >= pivot:
                lo = m
                m = min(hi, m * 2)
            if cnt(m) >= pivot:
                estimates.append(pivot << m)
                prev_m = m
                continue
            hi = m
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if cnt(mid) >= pivot:
                    lo = mid
                else:
                    hi = mid
            c = cnt(hi)
            estimates.append((c if c > 0 else pivot >> 1) << hi)
            prev_m = hi
        estimates.sort()
        count = min(estimates[len(estimates) // 2], 1 << len(proj))
        return finish(count)
    except _OutOfTime:
        return CountResult(None, "approx", time.monotonic() - t0,
                           timed_out=True, epsilon=epsilon, delta=delta)


def _count_up_to(f: CnfFormula, clauses, proj, limit: int, num_vars: int,
                 budget: _Budget) -> int:
    """Number of projected solutions of the given clause set, capped at
    limit."""
    aux = [v for v in range(1, num_vars + 1) if v not in f.projection or v > f.num_vars]
    solver = Solver(num_vars, clauses, order=list(proj) + aux)
    n = 0
    while n < limit:
        budget.tick()
        if not solver.solve():
            return n
        n += 1
        if not proj:
            return n
        solver.add_clause([-v if solver.model_bit(v) else v for v in proj])
    return n
