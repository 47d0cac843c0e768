"""Small deterministic CDCL SAT solver.

Clause learning with first-UIP conflict analysis and two watched literals,
no restarts, no clause deletion, static decision order with a false-first
phase. Determinism matters more than raw speed here: every solver run on the
same input visits the same search tree, so enumeration orders and counts are
reproducible across runs.
"""

from typing import Iterable, List, Optional, Sequence


class Solver:
    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]] = (),
                 order: Optional[Sequence[int]] = None):
        self.nv = num_vars
        self.assign = [0] * (num_vars + 1)   # 0 unassigned, 1 true, -1 false
        self.lvl = [0] * (num_vars + 1)
        self.reason: List[Optional[list]] = [None] * (num_vars + 1)
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        # watches[lit] holds clauses whose first two positions include lit
        self.watches = {}
        self.ok = True
        self.order = list(order) if order is not None else list(range(1, num_vars + 1))
        for cl in clauses:
            self.add_clause(cl)

    def value(self, lit: int) -> int:
        a = self.assign[abs(lit)]
        return a if lit > 0 else -a

    def level(self) -> int:
        return len(self.trail_lim)

    def add_clause(self, lits: Sequence[int]) -> bool:
        """Add a clause at decision level 0; returns False if the instance
        became unsatisfiable."""
        if not self.ok:
            return False
        self.cancel_until(0)
        cl = []
        for lit in lits:
            v = self.value(lit)
            if v == 1:
                return True          # satisfied at level 0
            if v == 0 and lit not in cl:
                if -lit in cl:
                    return True      # tautology
                cl.append(lit)
        if not cl:
            self.ok = False
            return False
        if len(cl) == 1:
            self._enqueue(cl[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self._watch(cl)
        return True

    def _watch(self, cl: list):
        self.watches.setdefault(-cl[0], []).append(cl)
        self.watches.setdefault(-cl[1], []).append(cl)

    def _enqueue(self, lit: int, reason) -> None:
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.lvl[v] = self.level()
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Optional[list]:
        """Unit propagation; returns a conflicting clause or None."""
        watches = self.watches
        assign = self.assign
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            wl = watches.get(lit)
            if not wl:
                continue
            watches[lit] = keep = []
            i = 0
            n = len(wl)
            while i < n:
                cl = wl[i]
                i += 1
                if cl[0] == -lit:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                a = assign[abs(first)]
                if (a if first > 0 else -a) == 1:
                    keep.append(cl)
                    continue
                for k in range(2, len(cl)):
                    q = cl[k]
                    aq = assign[abs(q)]
                    if (aq if q > 0 else -aq) != -1:
                        cl[1], cl[k] = q, cl[1]
                        watches.setdefault(-q, []).append(cl)
                        break
                else:
                    keep.append(cl)
                    if (a if first > 0 else -a) == -1:
                        keep.extend(wl[i:])
                        return cl
                    self._enqueue(first, cl)
        return None

    def cancel_until(self, lev: int) -> None:
        if self.level() <= lev:
            return
        bound = self.trail_lim[lev]
        for lit in self.trail[bound:]:
            self.assign[abs(lit)] = 0
        del self.trail[bound:]
        del self.trail_lim[lev:]
        self.qhead = len(self.trail)

    def _analyze(self, confl: list):
        """First-UIP learned clause and its backjump level."""
        learnt = [0]
        seen = [False] * (self.nv + 1)
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = self.level()
        while True:
            for q in (confl if p is None else confl[1:]):
                v = abs(q)
                if not seen[v] and self.lvl[v] > 0:
                    seen[v] = True
                    if self.lvl[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        # second watch must sit at the backjump level
        bt = 1
        for k in range(2, len(learnt)):
            if self.lvl[abs(learnt[k])] > self.lvl[abs(learnt[bt])]:
                bt = k
        learnt[1], learnt[bt] = learnt[bt], learnt[1]
        return learnt, self.lvl[abs(learnt[1])]

    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        """Satisfiability under assumptions; the full model is kept in
        self.assign until the next call mutates the solver."""
        if not self.ok:
            return False
        for lit in assumptions:
            if not 1 <= abs(lit) <= self.nv:
                raise ValueError("assumption literal %d out of range" % lit)
        self.cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        while True:
            confl = self._propagate()
            if confl is not None:
                if self.level() == 0:
                    self.ok = False
                    return False
                learnt, bt = self._analyze(confl)
                self.cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._watch(learnt)
                    self._enqueue(learnt[0], learnt)
                continue
            if self.level() < len(assumptions):
                p = assumptions[self.level()]
                v = self.value(p)
                if v == -1:
                    return False
                self.trail_lim.append(len(self.trail))
                if v == 0:
                    self._enqueue(p, None)
                continue
            var = 0
            for cand in self.order:
                if self.assign[cand] == 0:
                    var = cand
                    break
            if var == 0:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(-var, None)

    def model_bit(self, var: int) -> bool:
        return self.assign[var] == 1
