"""Turning a decision tree's decision regions into CNF.

Feature k of the tree maps to CNF variable k+1.  Each root-to-leaf path is a
conjunction of feature literals; the set of inputs a tree maps to one label
is the complement of the union of the other label's path cubes, so its CNF
is one clause per opposing path (the negated cube).  No auxiliary variables
are introduced, and the true/false sides of one tree partition the input
space by construction.
"""

from dataclasses import dataclass
from typing import List, Tuple

from .cnf import CnfFormula
from .dtree import DecisionTree, Leaf, Node


@dataclass(frozen=True)
class PathCondition:
    """Signed variable literals that hold along one root-to-leaf path."""
    literals: Tuple[int, ...]


@dataclass
class TreeSides:
    true_paths: List[PathCondition]
    false_paths: List[PathCondition]


def paths(tree: DecisionTree) -> TreeSides:
    """All root-to-leaf paths, depth first with the low branch first."""
    sides = TreeSides([], [])

    def walk(node, lits):
        if isinstance(node, Leaf):
            out = sides.true_paths if node.label == 1 else sides.false_paths
            out.append(PathCondition(tuple(lits)))
            return
        v = node.feature + 1
        walk(node.low, lits + [-v])
        walk(node.high, lits + [v])

    walk(tree.root, [])
    return sides


def side_cnf(tree: DecisionTree, side: bool) -> CnfFormula:
    """CNF over variables 1..feature_count satisfied exactly by the inputs
    the tree labels `side`.  A constant tree yields the empty formula for
    its own label and a single empty clause for the other."""
    sides = paths(tree)
    opposing = sides.false_paths if side else sides.true_paths
    clauses = tuple(tuple(-lit for lit in p.literals) for p in opposing)
    return CnfFormula(tree.feature_count, clauses)
