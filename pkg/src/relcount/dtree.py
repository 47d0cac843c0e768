"""Binary decision trees over 0/1 features: CART training, prediction,
test-set metrics, and a JSON file format.

Training is deterministic: the split minimizing weighted Gini impurity wins,
ties go to the lowest feature index, and leaf-label ties go to label 0.
A node keeps splitting while it is impure and some feature still separates
its samples (zero-gain splits are allowed, which is what makes parity-style
targets learnable); on binary features a used feature never splits again on
the same path, so paths never repeat a feature.
"""

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np


@dataclass
class Leaf:
    label: int


@dataclass
class Node:
    feature: int
    low: Union["Node", Leaf]   # feature == 0 branch
    high: Union["Node", Leaf]  # feature == 1 branch


@dataclass
class DecisionTree:
    feature_count: int
    root: Union[Node, Leaf]


@dataclass
class TrainParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2


@dataclass
class TraditionalMetrics:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float


def _as_arrays(train) -> Tuple[np.ndarray, np.ndarray]:
    if hasattr(train, "features"):
        X, y = train.features, train.labels
    else:
        X, y = train
    X = np.asarray(X, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise ValueError("expected features (m, k) with labels (m,)")
    if len(y) == 0:
        raise ValueError("cannot train on an empty dataset")
    if X.max(initial=0) > 1 or y.max(initial=0) > 1:
        raise ValueError("features and labels must be 0/1")
    return X, y


def train_cart(train, params: Optional[TrainParams] = None) -> DecisionTree:
    params = params or TrainParams()
    if params.min_samples_split < 2:
        raise ValueError("min_samples_split must be >= 2")
    X, y = _as_arrays(train)
    perm = np.arange(len(y), dtype=np.int64)
    root = _build(X, y, perm, 0, len(y), 0, params)
    return DecisionTree(X.shape[1], root)


def _build(X, y, perm, lo, hi, depth, params):
    idx = perm[lo:hi]
    n = hi - lo
    pos = int(y[idx].sum())
    majority = 1 if 2 * pos > n else 0
    if pos == 0 or pos == n:
        return Leaf(majority)
    if params.max_depth is not None and depth >= params.max_depth:
        return Leaf(majority)
    if n < params.min_samples_split:
        return Leaf(majority)
    Xsub = X[idx]
    ones = Xsub.sum(axis=0, dtype=np.int64)
    pos_ones = Xsub[y[idx] == 1].sum(axis=0, dtype=np.int64)
    zeros = n - ones
    pos_zeros = pos - pos_ones
    valid = (ones > 0) & (zeros > 0)
    if not valid.any():
        return Leaf(majority)
    # weighted Gini of the two children; 2p(c-p)/c per side of size c with
    # p positives (the 1/n normalization is constant per node)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (2.0 * pos_zeros * (zeros - pos_zeros) / zeros
             + 2.0 * pos_ones * (ones - pos_ones) / ones)
    w[~valid] = np.inf
    feature = int(np.argmin(w))
    mask = Xsub[:, feature].astype(bool)
    left = idx[~mask]
    right = idx[mask]
    mid = lo + len(left)
    perm[lo:mid] = left
    perm[mid:hi] = right
    return Node(feature,
                _build(X, y, perm, lo, mid, depth + 1, params),
                _build(X, y, perm, mid, hi, depth + 1, params))


def predict(tree: DecisionTree, features: Sequence[int]) -> int:
    if len(features) != tree.feature_count:
        raise ValueError("expected %d features, got %d"
                         % (tree.feature_count, len(features)))
    node = tree.root
    while isinstance(node, Node):
        node = node.high if features[node.feature] else node.low
    return node.label


def predict_batch(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != tree.feature_count:
        raise ValueError("expected shape (m, %d), got %s"
                         % (tree.feature_count, X.shape))
    out = np.empty(len(X), dtype=np.uint8)
    stack = [(tree.root, np.arange(len(X), dtype=np.int64))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.label
            continue
        mask = X[idx, node.feature].astype(bool)
        stack.append((node.low, idx[~mask]))
        stack.append((node.high, idx[mask]))
    return out


def eval_traditional(tree: DecisionTree, test) -> TraditionalMetrics:
    """Sample-counting confusion and scores on a held-out set; every 0/0
    ratio is defined as 0."""
    X, y = _as_arrays(test)
    pred = predict_batch(tree, X)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())

    def ratio(a, b):
        return a / b if b else 0.0

    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    return TraditionalMetrics(
        tp, fp, tn, fn,
        accuracy=ratio(tp + tn, tp + fp + tn + fn),
        precision=precision,
        recall=recall,
        f1=ratio(2 * precision * recall, precision + recall),
    )


def leaf_count(tree: DecisionTree) -> int:
    def walk(node):
        if isinstance(node, Leaf):
            return 1
        return walk(node.low) + walk(node.high)
    return walk(tree.root)


def tree_depth(tree: DecisionTree) -> int:
    def walk(node):
        if isinstance(node, Leaf):
            return 0
        return 1 + max(walk(node.low), walk(node.high))
    return walk(tree.root)


# ---------------------------------------------------------------------------
# file format: {"feature_count": k, "root": node} where a node is either
# {"leaf": 0|1} or {"feature": j, "low": node, "high": node}

def serialize(tree: DecisionTree) -> str:
    def conv(node):
        if isinstance(node, Leaf):
            return {"leaf": node.label}
        return {"feature": node.feature,
                "low": conv(node.low), "high": conv(node.high)}

    return json.dumps({"feature_count": tree.feature_count,
                       "root": conv(tree.root)},
                      sort_keys=True, separators=(",", ":")) + "\n"


def deserialize(text: str) -> DecisionTree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError("not valid JSON: %s" % exc)
    if not isinstance(obj, dict) or set(obj) != {"feature_count", "root"}:
        raise ValueError("top level must have exactly feature_count and root")
    k = obj["feature_count"]
    if not isinstance(k, int) or k < 1:
        raise ValueError("feature_count must be a positive int")

    def conv(node, path, used):
        if not isinstance(node, dict):
            raise ValueError("%s: node must be an object" % path)
        if set(node) == {"leaf"}:
            if node["leaf"] not in (0, 1):
                raise ValueError("%s: leaf label must be 0 or 1" % path)
            return Leaf(node["leaf"])
        if set(node) == {"feature", "low", "high"}:
            j = node["feature"]
            if not isinstance(j, int) or not 0 <= j < k:
                raise ValueError("%s: feature %r out of range [0, %d)"
                                 % (path, j, k))
            if j in used:
                raise ValueError("%s: feature %d repeats on this path" % (path, j))
            used = used | {j}
            return Node(j,
                        conv(node["low"], path + ".low", used),
                        conv(node["high"], path + ".high", used))
        raise ValueError("%s: node must have either leaf, or feature/low/high"
                         % path)

    return DecisionTree(k, conv(obj["root"], "root", frozenset()))
