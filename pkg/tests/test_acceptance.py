"""End-to-end acceptance checks: counting oracles, translation fidelity,
whole-space metrics, the generalization-gap phenomenon, estimator
guarantees, and format stability."""

import json
import os
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from relcount.cnf import CnfFormula, emit_dimacs, parse_dimacs
from relcount.counter import count_approx, count_bruteforce, count_exact
from relcount.dataset import (SplitRatio, make_balanced, make_ratio,
                              property_cnf, split, write_csv)
from relcount.dtree import (DecisionTree, Leaf, Node, deserialize,
                            eval_traditional, predict_batch, serialize,
                            train_cart)
from relcount.metrics import confusion_counts, scores, tree_difference
from relcount.props import Property, PropertySpec, encode, evaluate_batch
from relcount.tree2cnf import side_cnf

README = Path(__file__).resolve().parents[1] / "README.md"

NAMED_EXACT_COUNTS = (
    (Property.ANTISYMMETRIC, 5, 1_889_568),
    (Property.CONNEX, 6, 14_348_907),
    (Property.FUNCTION, 8, 16_777_216),
    (Property.FUNCTIONAL, 8, 43_046_721),
    (Property.INJECTIVE, 8, 16_777_216),
    (Property.IRREFLEXIVE, 5, 1_048_576),
    (Property.REFLEXIVE, 5, 1_048_576),
    (Property.NONSTRICTORDER, 7, 6_129_859),
    (Property.STRICTORDER, 7, 6_129_859),
    (Property.PREORDER, 7, 9_535_241),
    (Property.PARTIALORDER, 6, 8_321_472),
    (Property.TRANSITIVE, 6, 9_415_189),
)

SMALL_SCOPE_COUNTS = (
    (Property.EQUIVALENCE, 4, 15),     # set partitions of 4 elements
    (Property.BIJECTIVE, 4, 24),       # 4!
    (Property.TOTALORDER, 4, 24),      # 4!
    (Property.PARTIALORDER, 4, 3_504),
)

# properties whose scope-5 satisfying sets are small enough to enumerate
SCOPE5_PROPS = (Property.BIJECTIVE, Property.TOTALORDER, Property.EQUIVALENCE,
                Property.STRICTORDER, Property.PREORDER,
                Property.NONSTRICTORDER, Property.PARTIALORDER,
                Property.FUNCTION, Property.FUNCTIONAL, Property.INJECTIVE,
                Property.CONNEX, Property.TRANSITIVE)


def all_matrices(k):
    return ((np.arange(1 << k, dtype=np.uint32)[:, None]
             >> np.arange(k, dtype=np.uint32)) & 1).astype(np.uint8)


def cnf_holds_batch(f, X):
    """Evaluate an auxiliary-free CNF on each row of a 0/1 matrix."""
    ok = np.ones(len(X), dtype=bool)
    for cl in f.clauses:
        sat = np.zeros(len(X), dtype=bool)
        for lit in cl:
            col = X[:, abs(lit) - 1]
            sat |= (col == 1) if lit > 0 else (col == 0)
        ok &= sat
    return ok


def leaves_with_label(tree, label):
    n = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            n += node.label == label
        else:
            stack.extend((node.low, node.high))
    return n


def flipped(tree):
    def walk(node):
        if isinstance(node, Leaf):
            return Leaf(1 - node.label)
        return Node(node.feature, walk(node.low), walk(node.high))
    return DecisionTree(tree.feature_count, walk(tree.root))


def random_3cnf(rng, num_vars, num_clauses, with_projection):
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    projection = None
    if with_projection:
        width = rng.randint(1, num_vars)
        projection = frozenset(rng.sample(range(1, num_vars + 1), width))
    return CnfFormula(num_vars, tuple(clauses), projection)


# ---------------------------------------------------------------------------
# exact counts of the named property encodings

def test_exact_counts_of_named_property_encodings():
    for prop, scope, expected in NAMED_EXACT_COUNTS:
        r = count_exact(encode(PropertySpec(prop, scope)), timeout=5000.0)
        assert not r.timed_out
        assert r.count == expected, (prop, scope)


def test_exact_count_of_thirteen_element_total_orders_stretch():
    budget = float(os.environ.get("RELCOUNT_STRETCH_BUDGET", "60"))
    r = count_exact(encode(PropertySpec(Property.TOTALORDER, 13)),
                    timeout=budget)
    if r.timed_out:
        pytest.skip("13-element total-order count did not finish within "
                    "%.0fs (raise RELCOUNT_STRETCH_BUDGET to retry)" % budget)
    assert r.count == 6_227_020_800  # 13!


# ---------------------------------------------------------------------------
# exact counter vs explicit enumeration

def test_exact_counter_agrees_with_bruteforce_on_property_encodings():
    t0 = time.monotonic()
    for prop in Property:
        for scope in (3, 4):
            f = encode(PropertySpec(prop, scope))
            assert count_exact(f).count == count_bruteforce(f).count, \
                (prop, scope)
    assert time.monotonic() - t0 < 300


def test_exact_counter_agrees_with_bruteforce_on_random_formulas():
    t0 = time.monotonic()
    for i in range(200):
        rng = random.Random(2000 + i)
        f = random_3cnf(rng, rng.randint(4, 16), rng.randint(1, 60),
                        i % 2 == 0)
        assert count_exact(f).count == count_bruteforce(f).count, i
    assert time.monotonic() - t0 < 300


# ---------------------------------------------------------------------------
# small-scope combinatorial counts

def test_small_scope_counts_match_combinatorial_formulas():
    for prop, scope, expected in SMALL_SCOPE_COUNTS:
        assert count_exact(encode(PropertySpec(prop, scope))).count == \
            expected, (prop, scope)


# ---------------------------------------------------------------------------
# decision tree -> CNF translation fidelity

def tree_roster():
    """50 seeded trained trees across properties at scopes 3-5."""
    roster = []
    for i, prop in enumerate(Property):  # 16 trees
        roster.append((PropertySpec(prop, 3), 100 + i))
    for i, prop in enumerate(Property):  # 16 trees
        roster.append((PropertySpec(prop, 4), 200 + i))
    for i, prop in enumerate(list(Property)[:6]):  # 6 more, fresh seeds
        roster.append((PropertySpec(prop, 4), 300 + i))
    for i, prop in enumerate(SCOPE5_PROPS):  # 12 trees
        roster.append((PropertySpec(prop, 5), 400 + i))
    assert len(roster) == 50
    return roster


def roster_dataset(spec, seed):
    # surjective has fewer negatives than positives at these scopes, so a
    # fully-balanced set is impossible; use an even mix of sampled rows
    if spec.property is Property.SURJECTIVE:
        total = 300 if spec.scope == 3 else 20_000
        return make_ratio(spec, False, 50.0, total, seed=seed)
    return make_balanced(spec, seed=seed)


def test_tree_cnf_translation_fidelity_on_fifty_trees():
    for spec, seed in tree_roster():
        tree = train_cart(roster_dataset(spec, seed))
        k = spec.scope ** 2
        t_true = side_cnf(tree, True)
        t_false = side_cnf(tree, False)

        # every clause negates one path to a leaf of the opposite label
        assert len(t_true.clauses) == leaves_with_label(tree, 0)
        assert len(t_false.clauses) == leaves_with_label(tree, 1)

        # the two sides partition the whole input space
        assert count_exact(t_true).count + count_exact(t_false).count == \
            1 << k, (spec, seed)

        # CNF membership is the tree's own prediction
        if k <= 16:
            X = all_matrices(k)
        else:
            X = np.random.default_rng(seed).integers(
                0, 2, size=(10_000, k), dtype=np.uint8)
        pred = predict_batch(tree, X).astype(bool)
        assert np.array_equal(cnf_holds_batch(t_true, X), pred), (spec, seed)
        assert np.array_equal(cnf_holds_batch(t_false, X), ~pred), \
            (spec, seed)


def test_tree_cnf_translation_worked_example():
    # two-feature tree that predicts 1 exactly when both features agree;
    # its false side must be (x or y) and (not-x or not-y)
    tree = DecisionTree(2, Node(0, Node(1, Leaf(1), Leaf(0)),
                                Node(1, Leaf(0), Leaf(1))))
    f = side_cnf(tree, False)
    assert {frozenset(cl) for cl in f.clauses} == \
        {frozenset({1, 2}), frozenset({-1, -2})}


# ---------------------------------------------------------------------------
# whole-space confusion counts vs exhaustive enumeration

def test_whole_space_confusion_equals_exhaustive_enumeration_at_scope_4():
    t0 = time.monotonic()
    X = all_matrices(16)
    for prop in (Property.EQUIVALENCE, Property.TRANSITIVE,
                 Property.REFLEXIVE):
        spec = PropertySpec(prop, 4)
        tree = train_cart(make_balanced(spec, seed=7))
        pred = predict_batch(tree, X).astype(bool)
        truth = evaluate_batch(prop, X, 4).astype(bool)
        cc = confusion_counts(encode(spec), tree)
        assert cc.tp == int((pred & truth).sum())
        assert cc.fp == int((pred & ~truth).sum())
        assert cc.tn == int((~pred & ~truth).sum())
        assert cc.fn == int((~pred & truth).sum())
    assert time.monotonic() - t0 < 60


# ---------------------------------------------------------------------------
# tree-vs-tree difference invariants

def test_tree_difference_invariants_on_twenty_pairs():
    specs = (PropertySpec(Property.TRANSITIVE, 3),
             PropertySpec(Property.EQUIVALENCE, 3),
             PropertySpec(Property.ANTISYMMETRIC, 3),
             PropertySpec(Property.PARTIALORDER, 4),
             PropertySpec(Property.EQUIVALENCE, 4))
    for i in range(20):
        spec = specs[i % len(specs)]
        k = spec.scope ** 2
        d1 = train_cart(make_balanced(spec, seed=500 + i))
        d2 = train_cart(make_balanced(spec, seed=600 + i))

        d = tree_difference(d1, d2)
        assert d.tt + d.tf + d.ft + d.ff == 1 << k
        assert d.sim == 1 - d.diff

        swapped = tree_difference(d2, d1)
        assert (d.tf, d.ft) == (swapped.ft, swapped.tf)

        assert tree_difference(d1, d1).diff == 0
        assert tree_difference(d2, flipped(d2)).diff == 1


# ---------------------------------------------------------------------------
# the generalization gap: great test scores, poor whole-space precision

def test_generalization_gap_on_partial_orders():
    t0 = time.monotonic()
    spec = PropertySpec(Property.PARTIALORDER, 6)
    ds = make_balanced(spec, seed=0)  # every one of the 8,321,472 positives
    train, test = split(ds, SplitRatio(10, 90), seed=0)
    tree = train_cart(train)

    trad = eval_traditional(tree, test)
    assert trad.precision >= 0.95
    assert trad.f1 >= 0.95

    whole_space = scores(confusion_counts(property_cnf(spec, False), tree))
    assert whole_space["precision"] <= Fraction(1, 2)
    assert time.monotonic() - t0 < 600


def test_class_ratio_sweep_on_antisymmetric():
    # fixed budget of 8,000 positive samples, diluted with ever more
    # negatives as the valid share falls from 99% to 1%
    spec = PropertySpec(Property.ANTISYMMETRIC, 5)
    phi = property_cnf(spec, False)
    whole_space_precision = []
    for vp in (99.0, 90.0, 50.0, 10.0, 1.0):
        total = round(8000 * 100 / vp)
        ds = make_ratio(spec, False, vp, total, seed=0)
        train, test = split(ds, SplitRatio(75, 25), seed=0)
        tree = train_cart(train)
        assert eval_traditional(tree, test).precision >= 0.9, vp
        whole_space = scores(confusion_counts(phi, tree, seed=0))
        whole_space_precision.append(whole_space["precision"])
    assert all(b > a for a, b in zip(whole_space_precision,
                                     whole_space_precision[1:])), \
        [float(p) for p in whole_space_precision]


# ---------------------------------------------------------------------------
# approximate counter guarantee

def within_bound(estimate, exact):
    return exact / 1.8 <= estimate <= exact * 1.8


def test_approximate_counter_guarantee_battery():
    t0 = time.monotonic()

    for prop, scope, expected in ((Property.FUNCTION, 8, 16_777_216),
                                  (Property.TRANSITIVE, 6, 9_415_189)):
        f = encode(PropertySpec(prop, scope))
        exact = count_exact(f).count
        assert exact == expected
        hits = sum(1 for seed in range(20)
                   if within_bound(count_approx(f, epsilon=0.8, delta=0.2,
                                                seed=seed).count, exact))
        assert hits >= 16, prop

    for i in range(20):
        rng = random.Random(1000 + i)
        f = random_3cnf(rng, rng.randint(8, 16), rng.randint(5, 40),
                        i % 2 == 0)
        exact = count_exact(f).count
        hits = sum(1 for seed in range(20)
                   if within_bound(count_approx(f, epsilon=0.8, delta=0.2,
                                                seed=seed).count, exact))
        assert hits >= 16, i
        # the randomized parity path must hold the guarantee on its own
        hash_hits = sum(
            1 for seed in range(20)
            if within_bound(count_approx(f, epsilon=0.8, delta=0.2,
                                         seed=seed, exact_attempt=0).count,
                            exact))
        assert hash_hits >= 16, i

    assert time.monotonic() - t0 < 600


# ---------------------------------------------------------------------------
# declared reference points that are out of scope

def test_out_of_scope_reference_points_are_declared():
    text = README.read_text(encoding="utf-8")
    assert "Out of scope" in text
    # Alloy's symmetry-broken counts and CNF statistics
    assert text.count("Alloy") >= 2
    # whole-space metrics beyond the counter's reach
    assert "2^400" in text and "2^196" in text
    # replication of externally trained trees
    assert "scikit-learn" in text


# ---------------------------------------------------------------------------
# formats are byte-stable

def test_formats_round_trip_byte_exact(tmp_path):
    # DIMACS: emit -> parse -> emit
    for prop, scope in ((Property.EQUIVALENCE, 4), (Property.TRANSITIVE, 3)):
        for symbreak in (False, True):
            f = property_cnf(PropertySpec(prop, scope), symbreak)
            text = emit_dimacs(f)
            assert parse_dimacs(text) == f
            assert emit_dimacs(parse_dimacs(text)) == text

    # tree JSON: serialize -> deserialize -> serialize
    tree = train_cart(make_balanced(PropertySpec(Property.EQUIVALENCE, 4),
                                    seed=3))
    text = serialize(tree)
    assert serialize(deserialize(text)) == text
    assert json.loads(text)["feature_count"] == 16

    # dataset CSV: regeneration under a fixed seed
    paths = [tmp_path / name for name in ("a.csv", "b.csv")]
    for p in paths:
        write_csv(make_ratio(PropertySpec(Property.ANTISYMMETRIC, 4),
                             False, 30.0, 500, seed=11), str(p))
    a, b = (p.read_bytes() for p in paths)
    assert a == b
