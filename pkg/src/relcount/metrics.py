"""Whole-space evaluation of a decision tree against a property CNF, and
whole-space comparison of two trees, via projected model counting.

Instead of scoring on a sample, the confusion quadrants are measured over
every assignment of the projected variables:

    tp = mc(phi and tree_true)      fn = mc(phi and tree_false)
    fp = mc(tree_true) - tp         tn = mc(tree_false) - fn

The complements avoid negating phi (which may carry auxiliary variables and
cannot be negated clause-wise).  All four counts share one component memo.
Scores are exact rationals with every 0/0 ratio defined as 0.  Counts are
arbitrary-precision integers; a count that hit its time share is left out
and the result says which quadrants completed.  In approximate mode the
subtraction of two estimates can dip below zero and is clamped, and the
partition identity is not enforced.
"""

import time
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Dict, Optional

from .cnf import CnfFormula, conjoin
from .counter import (DEFAULT_TIMEOUT, CountResult, _ComponentCache,
                      count_approx, count_bruteforce, count_exact)
from .dtree import DecisionTree
from .tree2cnf import side_cnf

MODES = ("exact", "brute", "approx")


@dataclass
class ConfusionCounts:
    tp: Optional[int]
    fp: Optional[int]
    tn: Optional[int]
    fn: Optional[int]
    space_bits: int
    mode: str
    times: Dict[str, float] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return None not in (self.tp, self.fp, self.tn, self.fn)

    @property
    def completed_names(self):
        return tuple(name for name in ("tp", "fp", "tn", "fn")
                     if getattr(self, name) is not None)


@dataclass
class DiffResult:
    tt: Optional[int]
    tf: Optional[int]
    ft: Optional[int]
    ff: Optional[int]
    space_bits: int
    mode: str
    times: Dict[str, float] = field(default_factory=dict)
    diff: Optional[Fraction] = None
    sim: Optional[Fraction] = None

    @property
    def complete(self) -> bool:
        return None not in (self.tt, self.tf, self.ft, self.ff)


def _run_count(f: CnfFormula, mode: str, share: Optional[float],
               epsilon: float, delta: float, seed: int,
               cache: Optional[_ComponentCache]) -> CountResult:
    if mode == "exact":
        return count_exact(f, timeout=share, _cache=cache)
    if mode == "brute":
        return count_bruteforce(f)
    if mode == "approx":
        return count_approx(f, epsilon=epsilon, delta=delta, seed=seed,
                            timeout=share)
    raise ValueError("unknown counting mode %r (expected one of %s)"
                     % (mode, ", ".join(MODES)))


def _remap_tree_cnf(tree_f: CnfFormula, phi: CnfFormula) -> CnfFormula:
    """Rebase a tree-side CNF (variables 1..k) onto phi's projected
    variables, in ascending order, inside phi's variable space."""
    proj = sorted(phi.projection)
    clauses = tuple(
        tuple((1 if lit > 0 else -1) * proj[abs(lit) - 1] for lit in cl)
        for cl in tree_f.clauses)
    return CnfFormula(phi.num_vars, clauses, frozenset(proj))


def confusion_counts(phi: CnfFormula, tree: DecisionTree, mode: str = "exact",
                     timeout: float = DEFAULT_TIMEOUT, epsilon: float = 0.8,
                     delta: float = 0.2, seed: int = 0) -> ConfusionCounts:
    """Whole-space confusion quadrants of `tree` as a classifier for the
    solution set of `phi`, over phi's projected variables."""
    k = len(phi.projection)
    if tree.feature_count != k:
        raise ValueError("tree reads %d features but the formula projects "
                         "%d variables" % (tree.feature_count, k))
    t_true = _remap_tree_cnf(side_cnf(tree, True), phi)
    t_false = _remap_tree_cnf(side_cnf(tree, False), phi)
    cache = _ComponentCache() if mode == "exact" else None
    share = timeout / 4.0 if timeout is not None else None
    times: Dict[str, float] = {}
    raw: Dict[str, Optional[int]] = {}
    jobs = (("tp", conjoin(phi, t_true), 0),
            ("fn", conjoin(phi, t_false), 1),
            ("true_side", t_true, 2),
            ("false_side", t_false, 3))
    for name, f, tag in jobs:
        r = _run_count(f, mode, share, epsilon, delta, seed + tag, cache)
        raw[name] = r.count
        times[name] = r.elapsed
    tp, fn = raw["tp"], raw["fn"]
    fp = tn = None
    if raw["true_side"] is not None and tp is not None:
        fp = max(0, raw["true_side"] - tp)
    if raw["false_side"] is not None and fn is not None:
        tn = max(0, raw["false_side"] - fn)
    out = ConfusionCounts(tp, fp, tn, fn, k, mode, times)
    if out.complete and mode != "approx":
        if tp + fp + tn + fn != 1 << k:
            raise RuntimeError("internal error: confusion quadrants do not "
                               "partition the %d-bit space" % k)
    return out


def scores(counts: ConfusionCounts) -> Dict[str, Fraction]:
    """Exact rational accuracy/precision/recall/f1; 0/0 is 0.  Requires all
    four quadrants."""
    if not counts.complete:
        raise ValueError("cannot score a partial result (completed: %s)"
                         % (", ".join(counts.completed_names) or "none"))

    def ratio(a, b):
        return Fraction(a, b) if b else Fraction(0)

    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    return {
        "accuracy": ratio(tp + tn, tp + fp + tn + fn),
        "precision": precision,
        "recall": recall,
        "f1": ratio(2 * precision * recall, precision + recall),
    }


def tree_difference(d1: DecisionTree, d2: DecisionTree, mode: str = "exact",
                    timeout: float = DEFAULT_TIMEOUT, epsilon: float = 0.8,
                    delta: float = 0.2, seed: int = 0) -> DiffResult:
    """Whole-space agreement quadrants of two trees over the same features:
    tt/ff where they agree (true/false), tf/ft where they disagree.
    diff = (tf + ft) / 2^k and sim = 1 - diff."""
    if d1.feature_count != d2.feature_count:
        raise ValueError("trees read %d and %d features; they must match"
                         % (d1.feature_count, d2.feature_count))
    k = d1.feature_count
    s1 = {True: side_cnf(d1, True), False: side_cnf(d1, False)}
    s2 = {True: side_cnf(d2, True), False: side_cnf(d2, False)}
    cache = _ComponentCache() if mode == "exact" else None
    share = timeout / 4.0 if timeout is not None else None
    times: Dict[str, float] = {}
    raw: Dict[str, Optional[int]] = {}
    jobs = (("tt", True, True, 0), ("tf", True, False, 1),
            ("ft", False, True, 2), ("ff", False, False, 3))
    for name, a, b, tag in jobs:
        r = _run_count(conjoin(s1[a], s2[b]), mode, share, epsilon, delta,
                       seed + tag, cache)
        raw[name] = r.count
        times[name] = r.elapsed
    out = DiffResult(raw["tt"], raw["tf"], raw["ft"], raw["ff"], k, mode, times)
    if out.complete:
        total = out.tt + out.tf + out.ft + out.ff
        if mode != "approx" and total != 1 << k:
            raise RuntimeError("internal error: agreement quadrants do not "
                               "partition the %d-bit space" % k)
        out.diff = Fraction(out.tf + out.ft, 1 << k)
        out.sim = 1 - out.diff
    return out


# ---------------------------------------------------------------------------
# presentation

def sci_notation(v: int) -> str:
    """Scientific notation with two decimals, e.g. 7.88E+116."""
    if v == 0:
        return "0.00E+00"
    mant, _, exp = format(Decimal(v), ".2E").partition("E")
    e = int(exp)
    return "%sE%s%02d" % (mant, "+" if e >= 0 else "-", abs(e))


def _count_cell(v: Optional[int]):
    if v is None:
        return None
    return {"exact": str(v), "scientific": sci_notation(v)}


def confusion_report(counts: ConfusionCounts,
                     with_times: bool = True) -> dict:
    rep = {
        "mode": counts.mode,
        "space_bits": counts.space_bits,
        "space_size": _count_cell(1 << counts.space_bits),
        "counts": {name: _count_cell(getattr(counts, name))
                   for name in ("tp", "fp", "tn", "fn")},
        "complete": counts.complete,
    }
    if counts.complete:
        rep["scores"] = {name: "%.4f" % float(val)
                         for name, val in scores(counts).items()}
    if with_times:
        rep["times"] = {name: round(t, 3) for name, t in counts.times.items()}
    return rep


def diff_report(result: DiffResult, with_times: bool = True) -> dict:
    rep = {
        "mode": result.mode,
        "space_bits": result.space_bits,
        "counts": {name: _count_cell(getattr(result, name))
                   for name in ("tt", "tf", "ft", "ff")},
        "complete": result.complete,
    }
    if result.complete:
        rep["diff"] = "%.4f" % float(result.diff)
        rep["similarity"] = "%.4f" % float(result.sim)
        rep["diff_percent"] = "%.2f" % (100.0 * float(result.diff))
    if with_times:
        rep["times"] = {name: round(t, 3) for name, t in result.times.items()}
    return rep
