"""relcount: learn and audit relational properties by model counting.

The pieces, in dependency order:

- cnf: clause-tuple CNF formulas with projection sets, DIMACS I/O
- props: CNF encodings and direct evaluators for 16 relation properties,
  plus a lex-leader symmetry breaker over row/column permutations
- counter: exact, brute-force, and probably-approximately-correct projected
  model counting, and full solution enumeration
- dataset: labeled matrix datasets (exact positives, sampled negatives),
  stratified splits, CSV files
- dtree: CART decision trees on 0/1 features, JSON files
- tree2cnf: the CNF of a tree's true or false decision region
- metrics: whole-space confusion counts / scores of a tree against a
  property, and whole-space disagreement of two trees
- cli: the `relcount` command
"""

from .cnf import Clause, CnfFormula, DimacsError, cnf, conjoin, emit_dimacs, parse_dimacs
from .counter import (DEFAULT_TIMEOUT, CountResult, EnumerationIncomplete,
                      count_approx, count_bruteforce, count_exact,
                      enumerate_solutions, is_sat, solutions_array)
from .dataset import (Dataset, Sample, SplitRatio, gen_negative, gen_positive,
                      make_balanced, make_ratio, property_cnf, read_csv,
                      read_meta, split, write_csv, write_meta)
from .dtree import (DecisionTree, Leaf, Node, TraditionalMetrics, TrainParams,
                    deserialize, eval_traditional, leaf_count, predict,
                    predict_batch, serialize, train_cart, tree_depth)
from .metrics import (ConfusionCounts, DiffResult, confusion_counts,
                      confusion_report, diff_report, sci_notation, scores,
                      tree_difference)
from .props import (PROPERTY_NAMES, Property, PropertySpec, encode, evaluate,
                    evaluate_batch, lex_leader_symbreak, lookup,
                    matrix_leq_under_swaps, var)
from .tree2cnf import PathCondition, TreeSides, paths, side_cnf

__version__ = "0.1.0"

__all__ = [
    "Clause", "CnfFormula", "DimacsError", "cnf", "conjoin", "emit_dimacs",
    "parse_dimacs",
    "DEFAULT_TIMEOUT", "CountResult", "EnumerationIncomplete", "count_approx",
    "count_bruteforce", "count_exact", "enumerate_solutions", "is_sat",
    "solutions_array",
    "Dataset", "Sample", "SplitRatio", "gen_negative", "gen_positive",
    "make_balanced", "make_ratio", "property_cnf", "read_csv", "read_meta",
    "split", "write_csv", "write_meta",
    "DecisionTree", "Leaf", "Node", "TraditionalMetrics", "TrainParams",
    "deserialize", "eval_traditional", "leaf_count", "predict",
    "predict_batch", "serialize", "train_cart", "tree_depth",
    "ConfusionCounts", "DiffResult", "confusion_counts", "confusion_report",
    "diff_report", "sci_notation", "scores", "tree_difference",
    "PROPERTY_NAMES", "Property", "PropertySpec", "encode", "evaluate",
    "evaluate_batch", "lex_leader_symbreak", "lookup",
    "matrix_leq_under_swaps", "var",
    "PathCondition", "TreeSides", "paths", "side_cnf",
    "__version__",
]
