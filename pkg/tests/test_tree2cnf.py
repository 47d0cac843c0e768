"""Tree decision regions as CNF: worked example, partition and
complementarity invariants, and agreement with predict."""

import itertools

import numpy as np

from relcount.counter import count_exact
from relcount.dtree import DecisionTree, Leaf, Node, predict, predict_batch, train_cart
from relcount.tree2cnf import paths, side_cnf

# two features x (feature 0) and y (feature 1); predicts 1 iff x == y
EQ_TREE = DecisionTree(2, Node(0,
                               Node(1, Leaf(1), Leaf(0)),
                               Node(1, Leaf(0), Leaf(1))))


def clauses_hold(f, bits):
    return all(any((lit > 0) == bool(bits[abs(lit) - 1]) for lit in cl)
               for cl in f.clauses)


def test_worked_example_false_side():
    f = side_cnf(EQ_TREE, False)
    assert set(f.clauses) == {(-1, -2), (1, 2)}
    assert f.num_vars == 2


def test_worked_example_true_side():
    f = side_cnf(EQ_TREE, True)
    assert set(f.clauses) == {(-1, 2), (1, -2)}
    assert count_exact(f).count == 2


def test_worked_example_paths():
    sides = paths(EQ_TREE)
    assert len(sides.true_paths) + len(sides.false_paths) == 4
    assert {p.literals for p in sides.true_paths} == {(-1, -2), (1, 2)}
    assert {p.literals for p in sides.false_paths} == {(-1, 2), (1, -2)}
    # depth-first, low branch first
    assert [p.literals for p in sides.true_paths] == [(-1, -2), (1, 2)]


def test_paths_partition_the_input_space():
    rng = np.random.default_rng(6)
    X = rng.integers(0, 2, size=(300, 5), dtype=np.uint8)
    y = rng.integers(0, 2, size=300, dtype=np.uint8)
    tree = train_cart((X, y))
    sides = paths(tree)
    every = sides.true_paths + sides.false_paths
    for bits in itertools.product((0, 1), repeat=5):
        holding = [p for p in every
                   if all((lit > 0) == bool(bits[abs(lit) - 1])
                          for lit in p.literals)]
        assert len(holding) == 1


def test_clause_count_equals_opposing_leaf_count():
    rng = np.random.default_rng(8)
    X = rng.integers(0, 2, size=(400, 6), dtype=np.uint8)
    y = rng.integers(0, 2, size=400, dtype=np.uint8)
    tree = train_cart((X, y))
    sides = paths(tree)
    assert len(side_cnf(tree, True).clauses) == len(sides.false_paths)
    assert len(side_cnf(tree, False).clauses) == len(sides.true_paths)


def test_sides_complement_each_other():
    rng = np.random.default_rng(10)
    for seed in range(5):
        X = rng.integers(0, 2, size=(200, 4), dtype=np.uint8)
        y = rng.integers(0, 2, size=200, dtype=np.uint8)
        tree = train_cart((X, y))
        t = count_exact(side_cnf(tree, True)).count
        f = count_exact(side_cnf(tree, False)).count
        assert t + f == 2 ** 4


def test_membership_agrees_with_predict():
    rng = np.random.default_rng(12)
    X = rng.integers(0, 2, size=(500, 9), dtype=np.uint8)
    y = rng.integers(0, 2, size=500, dtype=np.uint8)
    tree = train_cart((X, y))
    t_side = side_cnf(tree, True)
    f_side = side_cnf(tree, False)
    probe = rng.integers(0, 2, size=(1000, 9), dtype=np.uint8)
    pred = predict_batch(tree, probe)
    for bits, p in zip(probe, pred):
        assert clauses_hold(t_side, bits) == (p == 1)
        assert clauses_hold(f_side, bits) == (p == 0)


def test_constant_trees():
    always = DecisionTree(3, Leaf(1))
    never = DecisionTree(3, Leaf(0))
    assert side_cnf(always, True).clauses == ()
    assert count_exact(side_cnf(always, True)).count == 8
    assert side_cnf(always, False).clauses == ((),)
    assert count_exact(side_cnf(always, False)).count == 0
    assert count_exact(side_cnf(never, True)).count == 0
    assert count_exact(side_cnf(never, False)).count == 8


def test_single_feature_tree():
    tree = DecisionTree(1, Node(0, Leaf(0), Leaf(1)))
    assert side_cnf(tree, True).clauses == ((1,),)
    assert side_cnf(tree, False).clauses == ((-1,),)
    assert predict(tree, (1,)) == 1
