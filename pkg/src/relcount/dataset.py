"""Labeled datasets of relation matrices.

Positive rows are the exact solution set of a property's CNF (optionally
intersected with the symmetry breaker), enumerated in canonical order.
Negative rows are drawn uniformly from the whole 2^(n*n) matrix space with a
seeded generator and kept when the property's direct evaluator rejects them;
rows are distinct within one dataset.  All sampling is deterministic for a
fixed seed: independent purposes use independent seeded streams.

A dataset is array-backed (rows of 0/1 features plus a label column) and
remembers how it was generated.  CSV files carry a header f0..f{k-1},label
and one digit per cell; a sidecar metadata file records the recipe.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .counter import DEFAULT_TIMEOUT, solutions_array
from .cnf import conjoin
from .props import PropertySpec, encode, evaluate_batch, lex_leader_symbreak, lookup

# purpose tags for the per-seed random streams
_STREAM_NEGATIVE = 0
_STREAM_SHUFFLE = 1
_STREAM_SUBSET = 2
_STREAM_SPLIT = 3

_NEGATIVE_CHUNK = 1 << 20


@dataclass(frozen=True)
class Sample:
    features: Tuple[int, ...]
    label: int


@dataclass(frozen=True)
class SplitRatio:
    train_percent: int
    test_percent: int

    def __post_init__(self):
        if self.train_percent + self.test_percent != 100:
            raise ValueError("split percentages must sum to 100")
        if self.train_percent <= 0 or self.test_percent <= 0:
            raise ValueError("both split parts must be positive")


class Dataset:
    """Rows of 0/1 features with 0/1 labels, plus generation metadata."""

    def __init__(self, features, labels, spec: Optional[PropertySpec] = None,
                 symbreak: bool = False, seed: int = 0):
        X = np.ascontiguousarray(features, dtype=np.uint8)
        y = np.ascontiguousarray(labels, dtype=np.uint8)
        if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
            raise ValueError("expected features (m, k) with labels (m,)")
        if X.size and X.max() > 1:
            raise ValueError("features must be 0/1")
        if y.size and y.max() > 1:
            raise ValueError("labels must be 0/1")
        self.features = X
        self.labels = y
        self.spec = spec
        self.symbreak = symbreak
        self.seed = seed

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def negatives(self) -> int:
        return len(self.labels) - self.positives

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> Sample:
        return Sample(tuple(int(b) for b in self.features[i]),
                      int(self.labels[i]))

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]


def property_cnf(spec: PropertySpec, symbreak: bool):
    """The property's CNF, intersected with the lex-leader breaker when
    symbreak is set.  Projection stays on the n*n matrix variables."""
    f = encode(spec)
    if symbreak:
        f = conjoin(f, lex_leader_symbreak(spec.scope))
    return f


def gen_positive(spec: PropertySpec, symbreak: bool = False, seed: int = 0,
                 timeout: float = DEFAULT_TIMEOUT) -> Dataset:
    """Every satisfying matrix of the property (and breaker, if set), in
    canonical row order, labeled 1."""
    X = solutions_array(property_cnf(spec, symbreak), timeout=timeout)
    return Dataset(X, np.ones(len(X), dtype=np.uint8), spec, symbreak, seed)


def gen_negative(spec: PropertySpec, count: int, seed: int = 0) -> Dataset:
    """`count` distinct uniformly drawn matrices that violate the property,
    labeled 0, in draw order."""
    if count < 0:
        raise ValueError("count must be >= 0")
    k = spec.scope * spec.scope
    rng = np.random.default_rng([seed, _STREAM_NEGATIVE])
    chunks = []
    got = 0
    drawn = 0
    budget = 200 * (count + 1) + 1_000_000
    while got < count:
        if drawn >= budget:
            raise ValueError(
                "rejection sampling stalled for %s scope %d: %d of %d "
                "negatives after %d draws (property nearly always holds?)"
                % (spec.property.value, spec.scope, got, count, drawn))
        size = min(_NEGATIVE_CHUNK, max(4096, 2 * (count - got)))
        block = rng.integers(0, 2, size=(size, k), dtype=np.uint8)
        drawn += size
        keep = block[~evaluate_batch(spec.property, block, spec.scope)]
        chunks.append(keep)
        got += len(keep)
    X = np.concatenate(chunks) if chunks else np.zeros((0, k), dtype=np.uint8)
    X = _dedupe_keep_first(X)
    while len(X) < count:
        # rare: duplicates ate into the quota; top up from the same stream
        size = max(4096, 2 * (count - len(X)))
        block = rng.integers(0, 2, size=(size, k), dtype=np.uint8)
        drawn += size
        if drawn >= budget:
            raise ValueError(
                "rejection sampling stalled for %s scope %d: %d of %d "
                "negatives after %d draws"
                % (spec.property.value, spec.scope, len(X), count, drawn))
        keep = block[~evaluate_batch(spec.property, block, spec.scope)]
        X = _dedupe_keep_first(np.concatenate([X, keep]))
    return Dataset(X[:count], np.zeros(count, dtype=np.uint8),
                   spec, False, seed)


def _dedupe_keep_first(X: np.ndarray) -> np.ndarray:
    if len(X) < 2:
        return X
    packed = np.packbits(X, axis=1)
    view = packed.view([("", packed.dtype)] * packed.shape[1]).ravel()
    _, first = np.unique(view, return_index=True)
    first.sort()
    return X[first]


def _shuffled(X_pos, X_neg, spec, symbreak, seed) -> Dataset:
    X = np.concatenate([X_pos, X_neg])
    y = np.concatenate([np.ones(len(X_pos), dtype=np.uint8),
                        np.zeros(len(X_neg), dtype=np.uint8)])
    perm = np.random.default_rng([seed, _STREAM_SHUFFLE]).permutation(len(y))
    return Dataset(X[perm], y[perm], spec, symbreak, seed)


def make_balanced(spec: PropertySpec, symbreak: bool = False, seed: int = 0,
                  timeout: float = DEFAULT_TIMEOUT) -> Dataset:
    """All positives plus an equal number of sampled negatives, shuffled."""
    pos = gen_positive(spec, symbreak, seed, timeout)
    neg = gen_negative(spec, len(pos), seed)
    return _shuffled(pos.features, neg.features, spec, symbreak, seed)


def make_ratio(spec: PropertySpec, symbreak: bool, valid_percent: float,
               total: int, seed: int = 0,
               timeout: float = DEFAULT_TIMEOUT) -> Dataset:
    """`total` rows of which ceil(total * valid_percent / 100) are positives
    drawn without replacement from the property's solutions, rest sampled
    negatives, shuffled."""
    if not 0 < valid_percent < 100:
        raise ValueError("valid_percent must be strictly between 0 and 100")
    if total < 2:
        raise ValueError("total must be at least 2")
    want_pos = math.ceil(total * valid_percent / 100.0)
    want_neg = total - want_pos
    pos = gen_positive(spec, symbreak, seed, timeout)
    if len(pos) < want_pos:
        raise ValueError(
            "%s scope %d has only %d positive matrices%s, need %d (short by %d)"
            % (spec.property.value, spec.scope, len(pos),
               " under the symmetry breaker" if symbreak else "",
               want_pos, want_pos - len(pos)))
    sel = np.random.default_rng([seed, _STREAM_SUBSET]).choice(
        len(pos), size=want_pos, replace=False)
    sel.sort()
    neg = gen_negative(spec, want_neg, seed)
    return _shuffled(pos.features[sel], neg.features, spec, symbreak, seed)


def split(ds: Dataset, ratio: SplitRatio, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Stratified train/test split.  Each class contributes its share of the
    train size (largest remainder rounding); both sides must end up
    non-empty.  Row order within each side follows the parent dataset."""
    total_train = len(ds) * ratio.train_percent // 100
    if total_train == 0 or total_train == len(ds):
        raise ValueError("split %d:%d of %d rows leaves one side empty"
                         % (ratio.train_percent, ratio.test_percent, len(ds)))
    by_class = [np.flatnonzero(ds.labels == c) for c in (0, 1)]
    quota = [len(idx) * ratio.train_percent / 100.0 for idx in by_class]
    base = [int(q) for q in quota]
    extra = total_train - sum(base)
    # hand out leftover seats by largest fractional remainder, class 0 first
    order = sorted((0, 1), key=lambda c: (-(quota[c] - base[c]), c))
    for c in order:
        if extra <= 0:
            break
        room = len(by_class[c]) - base[c]
        take = min(extra, room)
        base[c] += take
        extra -= take
    rng = np.random.default_rng([seed, _STREAM_SPLIT])
    train_parts = []
    test_parts = []
    for c in (0, 1):
        idx = by_class[c]
        pick = rng.permutation(len(idx))
        train_parts.append(idx[pick[:base[c]]])
        test_parts.append(idx[pick[base[c]:]])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    mk = lambda sel: Dataset(ds.features[sel], ds.labels[sel],
                             ds.spec, ds.symbreak, ds.seed)
    return mk(train_idx), mk(test_idx)


# ---------------------------------------------------------------------------
# files

def write_csv(ds: Dataset, path: str) -> None:
    k = ds.feature_count
    header = ",".join(["f%d" % i for i in range(k)] + ["label"]) + "\n"
    m = len(ds)
    row = np.empty((m, 2 * k + 2), dtype=np.uint8)
    row[:, 0:2 * k:2] = ds.features + ord("0")
    row[:, 1:2 * k:2] = ord(",")
    row[:, 2 * k] = ds.labels + ord("0")
    row[:, 2 * k + 1] = ord("\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(row.tobytes())


def read_csv(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 2 or cols[-1] != "label":
            raise ValueError("%s: expected header f0,..,label" % path)
        if cols[:-1] != ["f%d" % i for i in range(len(cols) - 1)]:
            raise ValueError("%s: malformed feature columns in header" % path)
        try:
            data = np.loadtxt(fh, delimiter=",", dtype=np.uint8,
                              ndmin=2)
        except ValueError as exc:
            raise ValueError("%s: bad row: %s" % (path, exc))
    if data.size == 0:
        data = data.reshape(0, len(cols))
    if data.shape[1] != len(cols):
        raise ValueError("%s: rows have %d fields, header has %d"
                         % (path, data.shape[1], len(cols)))
    return Dataset(data[:, :-1], data[:, -1])


def write_meta(ds: Dataset, path: str) -> None:
    lines = []
    if ds.spec is not None:
        lines.append("property = %s" % ds.spec.property.value)
        lines.append("scope = %d" % ds.spec.scope)
    lines.append("symbreak = %s" % ("true" if ds.symbreak else "false"))
    lines.append("seed = %d" % ds.seed)
    lines.append("rows = %d" % len(ds))
    lines.append("positives = %d" % ds.positives)
    lines.append("negatives = %d" % ds.negatives)
    lines.append("features = %d" % ds.feature_count)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_meta(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s: expected key = value, got %r"
                                 % (path, line))
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def dataset_spec_from_meta(meta: dict) -> Optional[PropertySpec]:
    if "property" in meta and "scope" in meta:
        return PropertySpec(lookup(meta["property"]), int(meta["scope"]))
    return None
