"""Command-line driver.

Subcommands: encode, count, gen, train, tree2cnf, accmc, diffmc, experiment.
Exit codes: 0 success, 2 usage, 3 timeout/incomplete, 4 bad data or I/O.

All machine-readable artifacts (CSV, CNF, JSON) are byte-deterministic for a
fixed seed; wall-clock timings are kept out of them (the experiment command
writes clocks to times.json only) so reruns are directly diffable.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .cnf import emit_dimacs, parse_dimacs
from .counter import (DEFAULT_TIMEOUT, EnumerationIncomplete, count_approx,
                      count_bruteforce, count_exact)
from .dataset import (SplitRatio, make_balanced, make_ratio, property_cnf,
                      read_csv, split, write_csv, write_meta)
from .dtree import (TrainParams, TraditionalMetrics, deserialize,
                    eval_traditional, leaf_count, serialize, train_cart,
                    tree_depth)
from .metrics import (MODES, confusion_counts, confusion_report, diff_report,
                      sci_notation, tree_difference)
from .props import PROPERTY_NAMES, PropertySpec, lookup

_FORMATS = "cnf-dimacs 1, tree-json 1, dataset-csv 1, report-json 1"


# ---------------------------------------------------------------------------
# small shared helpers

def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_json(path: str, obj) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _as_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError("expected a boolean, got %r" % s)


def _parse_split(s: str) -> SplitRatio:
    a, sep, b = s.partition(":")
    if not sep:
        raise ValueError("expected TRAIN:TEST, e.g. 75:25, got %r" % s)
    return SplitRatio(int(a), int(b))


def _run_one_count(f, args):
    if args.mode == "exact":
        return count_exact(f, timeout=args.timeout)
    if args.mode == "brute":
        return count_bruteforce(f)
    return count_approx(f, epsilon=args.epsilon, delta=args.delta,
                        seed=args.seed, timeout=args.timeout)


def _count_opts(p):
    p.add_argument("--mode", choices=MODES, default="exact",
                   help="counting mode (default exact)")
    p.add_argument("--epsilon", type=float, default=0.8,
                   help="approx mode: relative tolerance (default 0.8)")
    p.add_argument("--delta", type=float, default=0.2,
                   help="approx mode: failure probability (default 0.2)")
    p.add_argument("--seed", type=int, default=0,
                   help="approx mode: random seed (default 0)")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                   help="seconds before giving up (default %g)"
                        % DEFAULT_TIMEOUT)


def _print_count_cells(rep_counts, order):
    for name in order:
        cell = rep_counts[name]
        if cell is None:
            print("%s = (did not finish)" % name)
        else:
            print("%s = %s [%s]" % (name, cell["exact"], cell["scientific"]))


def _trad_dict(m: TraditionalMetrics) -> dict:
    return {"tp": m.tp, "fp": m.fp, "tn": m.tn, "fn": m.fn,
            "accuracy": "%.4f" % m.accuracy,
            "precision": "%.4f" % m.precision,
            "recall": "%.4f" % m.recall,
            "f1": "%.4f" % m.f1}


# ---------------------------------------------------------------------------
# plain subcommands

def cmd_encode(args) -> int:
    spec = PropertySpec(lookup(args.property), args.scope)
    text = emit_dimacs(property_cnf(spec, args.symbreak))
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_count(args) -> int:
    f = parse_dimacs(_read_text(args.cnf))
    r = _run_one_count(f, args)
    if r.timed_out or r.count is None:
        print("timed out after %.1fs (mode %s)" % (r.elapsed, r.mode),
              file=sys.stderr)
        return 3
    print("count = %d" % r.count)
    print("scientific = %s" % sci_notation(r.count))
    print("mode = %s" % r.mode)
    if r.mode == "approx":
        print("epsilon = %g" % r.epsilon)
        print("delta = %g" % r.delta)
    print("elapsed_s = %.3f" % r.elapsed)
    return 0


def cmd_gen(args) -> int:
    spec = PropertySpec(lookup(args.property), args.scope)
    if args.valid_percent is not None:
        if args.total is None:
            args.parser.error("--valid-percent requires --total")
        ds = make_ratio(spec, args.symbreak, args.valid_percent, args.total,
                        args.seed, timeout=args.timeout)
    else:
        ds = make_balanced(spec, args.symbreak, args.seed,
                           timeout=args.timeout)
    write_csv(ds, args.output + ".csv")
    write_meta(ds, args.output + ".meta")
    print("wrote %d rows (%d positive, %d negative) to %s.csv"
          % (len(ds), ds.positives, ds.negatives, args.output))
    return 0


def cmd_train(args) -> int:
    ds = read_csv(args.data)
    params = TrainParams(max_depth=args.max_depth,
                         min_samples_split=args.min_samples_split)
    tree = train_cart(ds, params)
    _write_text(args.output, serialize(tree))
    print("tree: %d features, depth %d, %d leaves"
          % (tree.feature_count, tree_depth(tree), leaf_count(tree)))
    if args.test:
        m = eval_traditional(tree, read_csv(args.test))
        print("test: tp=%d fp=%d tn=%d fn=%d" % (m.tp, m.fp, m.tn, m.fn))
        print("accuracy = %.4f" % m.accuracy)
        print("precision = %.4f" % m.precision)
        print("recall = %.4f" % m.recall)
        print("f1 = %.4f" % m.f1)
    return 0


def cmd_tree2cnf(args) -> int:
    from .tree2cnf import side_cnf
    tree = deserialize(_read_text(args.tree))
    if args.side == "both":
        if not args.output:
            args.parser.error("--side both requires -o PREFIX")
        for side, tag in ((True, "true"), (False, "false")):
            _write_text("%s_%s.cnf" % (args.output, tag),
                        emit_dimacs(side_cnf(tree, side)))
            print("wrote %s_%s.cnf" % (args.output, tag))
        return 0
    text = emit_dimacs(side_cnf(tree, args.side == "true"))
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_accmc(args) -> int:
    tree = deserialize(_read_text(args.tree))
    phi = parse_dimacs(_read_text(args.cnf))
    counts = confusion_counts(phi, tree, mode=args.mode,
                              timeout=args.timeout, epsilon=args.epsilon,
                              delta=args.delta, seed=args.seed)
    rep = confusion_report(counts, with_times=False)
    if args.json:
        _write_json(args.json, rep)
    print("space = 2^%d [%s]" % (counts.space_bits,
                                 rep["space_size"]["scientific"]))
    print("mode = %s" % counts.mode)
    _print_count_cells(rep["counts"], ("tp", "fp", "tn", "fn"))
    if counts.complete:
        for name in ("accuracy", "precision", "recall", "f1"):
            print("%s = %s" % (name, rep["scores"][name]))
    for name, t in counts.times.items():
        print("time_%s_s = %.3f" % (name, t))
    if not counts.complete:
        print("incomplete: finished %s"
              % (", ".join(counts.completed_names) or "nothing"),
              file=sys.stderr)
        return 3
    return 0


def cmd_diffmc(args) -> int:
    d1 = deserialize(_read_text(args.tree1))
    d2 = deserialize(_read_text(args.tree2))
    result = tree_difference(d1, d2, mode=args.mode, timeout=args.timeout,
                             epsilon=args.epsilon, delta=args.delta,
                             seed=args.seed)
    rep = diff_report(result, with_times=False)
    if args.json:
        _write_json(args.json, rep)
    print("space = 2^%d" % result.space_bits)
    print("mode = %s" % result.mode)
    _print_count_cells(rep["counts"], ("tt", "tf", "ft", "ff"))
    if result.complete:
        print("diff = %s (%s%%)" % (rep["diff"], rep["diff_percent"]))
        print("similarity = %s" % rep["similarity"])
    for name, t in result.times.items():
        print("time_%s_s = %.3f" % (name, t))
    if not result.complete:
        print("incomplete", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# experiment pipeline

@dataclass
class ExperimentConfig:
    property: str
    scope: int
    symbreak: bool = False
    split: str = "75:25"
    valid_percent: Optional[float] = None  # None means balanced
    total: Optional[int] = None
    seed: int = 0
    mode: str = "exact"
    epsilon: float = 0.8
    delta: float = 0.2
    timeout: float = DEFAULT_TIMEOUT
    max_depth: Optional[int] = None
    min_samples_split: int = 2


_CONFIG_KEYS = {
    "property": str, "scope": int, "symbreak": _as_bool, "split": str,
    "valid_percent": float, "total": int, "seed": int, "mode": str,
    "epsilon": float, "delta": float, "timeout": float, "max_depth": int,
    "min_samples_split": int,
}


def _read_config(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key = value" % (path, lineno))
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError("%s:%d: unknown config key %r (known: %s)"
                                 % (path, lineno, key,
                                    ", ".join(sorted(_CONFIG_KEYS))))
            try:
                out[key] = _CONFIG_KEYS[key](val.strip())
            except ValueError as exc:
                raise ValueError("%s:%d: bad value for %s: %s"
                                 % (path, lineno, key, exc))
    return out


def _build_experiment_config(args) -> ExperimentConfig:
    file_vals = _read_config(args.config) if args.config else {}
    merged = dict(file_vals)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if "property" not in merged:
        args.parser.error("experiment needs a property "
                          "(--property or a config file)")
    if "scope" not in merged:
        args.parser.error("experiment needs a scope "
                          "(--scope or a config file)")
    lookup(merged["property"])  # validate early
    if merged.get("mode", "exact") not in MODES:
        raise ValueError("unknown counting mode %r" % merged["mode"])
    _parse_split(merged.get("split", "75:25"))  # validate early
    return ExperimentConfig(**merged)


def _config_text(cfg: ExperimentConfig) -> str:
    lines = ["property = %s" % cfg.property,
             "scope = %d" % cfg.scope,
             "symbreak = %s" % ("true" if cfg.symbreak else "false"),
             "split = %s" % cfg.split]
    if cfg.valid_percent is not None:
        lines.append("valid_percent = %g" % cfg.valid_percent)
        lines.append("total = %d" % cfg.total)
    lines += ["seed = %d" % cfg.seed,
              "mode = %s" % cfg.mode]
    if cfg.mode == "approx":
        lines.append("epsilon = %g" % cfg.epsilon)
        lines.append("delta = %g" % cfg.delta)
    lines.append("timeout = %g" % cfg.timeout)
    if cfg.max_depth is not None:
        lines.append("max_depth = %d" % cfg.max_depth)
    lines.append("min_samples_split = %d" % cfg.min_samples_split)
    return "\n".join(lines) + "\n"


def cmd_experiment(args) -> int:
    cfg = _build_experiment_config(args)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    path = lambda name: os.path.join(outdir, name)
    spec = PropertySpec(lookup(cfg.property), cfg.scope)
    ratio = _parse_split(cfg.split)

    stage_times = {}
    error = None  # (stage, exception)
    report = {"config": dict(cfg.__dict__), "error": None}
    artifacts = ["config.txt"]
    _write_text(path("config.txt"), _config_text(cfg))

    def run_stage(name, fn):
        nonlocal error
        if error is not None:
            return None
        t0 = time.monotonic()
        try:
            out = fn()
            stage_times[name] = round(time.monotonic() - t0, 3)
            return out
        except (ValueError, OSError, EnumerationIncomplete) as exc:
            stage_times[name] = round(time.monotonic() - t0, 3)
            error = (name, exc)
            return None

    def do_dataset():
        if cfg.valid_percent is not None:
            if cfg.total is None:
                raise ValueError("valid_percent set but total missing")
            ds = make_ratio(spec, cfg.symbreak, cfg.valid_percent, cfg.total,
                            cfg.seed, timeout=cfg.timeout)
        else:
            ds = make_balanced(spec, cfg.symbreak, cfg.seed,
                               timeout=cfg.timeout)
        write_csv(ds, path("dataset.csv"))
        write_meta(ds, path("dataset.meta"))
        artifacts.extend(["dataset.csv", "dataset.meta"])
        report["dataset"] = {"rows": len(ds), "positives": ds.positives,
                             "negatives": ds.negatives,
                             "features": ds.feature_count}
        return ds

    ds = run_stage("dataset", do_dataset)

    def do_split():
        tr, te = split(ds, ratio, cfg.seed)
        report["split"] = {"ratio": cfg.split, "train_rows": len(tr),
                           "test_rows": len(te),
                           "train_positives": tr.positives,
                           "test_positives": te.positives}
        return tr, te

    parts = run_stage("split", do_split)

    def do_train():
        tr, te = parts
        tree = train_cart(tr, TrainParams(cfg.max_depth,
                                          cfg.min_samples_split))
        _write_text(path("model.json"), serialize(tree))
        trad = _trad_dict(eval_traditional(tree, te))
        _write_json(path("traditional.json"), trad)
        artifacts.extend(["model.json", "traditional.json"])
        report["tree"] = {"depth": tree_depth(tree),
                          "leaves": leaf_count(tree)}
        report["traditional"] = trad
        return tree

    tree = run_stage("train", do_train)

    def do_tree_cnfs():
        from .tree2cnf import side_cnf
        for side, tag in ((True, "true"), (False, "false")):
            _write_text(path("tree_%s.cnf" % tag),
                        emit_dimacs(side_cnf(tree, side)))
            artifacts.append("tree_%s.cnf" % tag)

    run_stage("tree_to_cnf", do_tree_cnfs)

    def do_property_cnf():
        phi = property_cnf(spec, cfg.symbreak)
        _write_text(path("property.cnf"), emit_dimacs(phi))
        artifacts.append("property.cnf")
        return phi

    phi = run_stage("property_cnf", do_property_cnf)

    counts = None

    def do_whole_space():
        c = confusion_counts(phi, tree, mode=cfg.mode, timeout=cfg.timeout,
                             epsilon=cfg.epsilon, delta=cfg.delta,
                             seed=cfg.seed)
        rep = confusion_report(c, with_times=False)
        _write_json(path("wholespace.json"), rep)
        artifacts.append("wholespace.json")
        report["whole_space"] = rep
        return c

    counts = run_stage("whole_space_metrics", do_whole_space)

    if error is not None:
        report["error"] = {"stage": error[0], "message": str(error[1])}
    report["artifacts"] = sorted(set(artifacts + ["report.json",
                                                  "report.txt"]))
    _write_json(path("report.json"), report)
    _write_text(path("report.txt"), _report_text(report))
    times = {"stages": stage_times}
    if counts is not None:
        times["counts"] = {k: round(v, 3) for k, v in counts.times.items()}
    _write_json(path("times.json"), times)
    print("report written to %s" % outdir)

    if error is not None:
        print("experiment failed at stage %s: %s" % (error[0], error[1]),
              file=sys.stderr)
        return 3 if isinstance(error[1], EnumerationIncomplete) else 4
    if counts is not None and not counts.complete:
        print("whole-space counting incomplete (finished: %s)"
              % (", ".join(counts.completed_names) or "nothing"),
              file=sys.stderr)
        return 3
    return 0


def _report_text(report: dict) -> str:
    cfg = report["config"]
    lines = ["experiment: property=%s scope=%d symbreak=%s seed=%d"
             % (cfg["property"], cfg["scope"],
                "true" if cfg["symbreak"] else "false", cfg["seed"])]
    ds = report.get("dataset")
    if ds:
        lines.append("dataset: %d rows (%d positive / %d negative)"
                     % (ds["rows"], ds["positives"], ds["negatives"]))
    sp = report.get("split")
    if sp:
        lines.append("split %s: train=%d test=%d"
                     % (sp["ratio"], sp["train_rows"], sp["test_rows"]))
    tr = report.get("tree")
    if tr:
        lines.append("tree: depth=%d leaves=%d" % (tr["depth"], tr["leaves"]))
    trad = report.get("traditional")
    ws = report.get("whole_space")
    if trad or ws:
        lines.append("")
        lines.append("%-10s %12s %12s" % ("metric", "traditional",
                                          "whole-space"))
        for name in ("accuracy", "precision", "recall", "f1"):
            a = trad[name] if trad else "-"
            b = ws["scores"][name] if ws and "scores" in ws else "-"
            lines.append("%-10s %12s %12s" % (name, a, b))
    if ws:
        lines.append("")
        for name in ("tp", "fp", "tn", "fn"):
            cell = ws["counts"][name]
            lines.append("%s = %s" % (name, "(did not finish)" if cell is None
                                      else "%s [%s]" % (cell["exact"],
                                                        cell["scientific"])))
    if report.get("error"):
        lines.append("")
        lines.append("FAILED at stage %s: %s"
                     % (report["error"]["stage"], report["error"]["message"]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relcount",
        description="Encode relational properties as CNF, count their "
                    "models, train decision trees, and score the trees over "
                    "the whole input space by model counting.")
    parser.add_argument("--version", action="version",
                        version="relcount %s (formats: %s)"
                                % (__version__, _FORMATS))
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func, parser=p)
        return p

    p = add("encode", cmd_encode,
            "write a property's CNF in DIMACS form")
    p.add_argument("--property", required=True,
                   help="one of: %s" % ", ".join(PROPERTY_NAMES))
    p.add_argument("--scope", type=_positive_int, required=True,
                   help="domain size n (matrices are n*n)")
    p.add_argument("--symbreak", action="store_true",
                   help="conjoin the lex-leader symmetry breaker")
    p.add_argument("-o", "--output", help="output file (default stdout)")

    p = add("count", cmd_count, "count models of a DIMACS CNF file")
    p.add_argument("cnf", help="DIMACS file, 'c ind' lines mark projection")
    _count_opts(p)

    p = add("gen", cmd_gen, "generate a labeled dataset (CSV + metadata)")
    p.add_argument("--property", required=True)
    p.add_argument("--scope", type=_positive_int, required=True)
    p.add_argument("--symbreak", action="store_true")
    p.add_argument("--valid-percent", type=float, default=None,
                   help="positive share in percent (default: balanced)")
    p.add_argument("--total", type=int, default=None,
                   help="total rows (required with --valid-percent)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("-o", "--output", required=True,
                   help="path prefix; writes PREFIX.csv and PREFIX.meta")

    p = add("train", cmd_train, "train a decision tree on a dataset CSV")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--test", help="optional CSV to score after training")
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("-o", "--output", required=True, help="tree JSON file")

    p = add("tree2cnf", cmd_tree2cnf,
            "write the CNF of a tree's true or false region")
    p.add_argument("--tree", required=True, help="tree JSON file")
    p.add_argument("--side", choices=("true", "false", "both"),
                   default="both")
    p.add_argument("-o", "--output",
                   help="output file, or prefix with --side both")

    p = add("accmc", cmd_accmc,
            "whole-space confusion counts and scores of a tree vs a CNF")
    p.add_argument("--tree", required=True)
    p.add_argument("--cnf", required=True,
                   help="property CNF (projection = the tree's features)")
    p.add_argument("--json", help="also write the report as JSON")
    _count_opts(p)

    p = add("diffmc", cmd_diffmc,
            "whole-space disagreement of two trees")
    p.add_argument("--tree1", required=True)
    p.add_argument("--tree2", required=True)
    p.add_argument("--json", help="also write the report as JSON")
    _count_opts(p)

    p = add("experiment", cmd_experiment,
            "run the full pipeline and write a report directory")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--out", default="report", help="report directory")
    p.add_argument("--property")
    p.add_argument("--scope", type=_positive_int)
    p.add_argument("--symbreak", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--split", help="train:test percentages, e.g. 75:25")
    p.add_argument("--valid-percent", dest="valid_percent", type=float)
    p.add_argument("--total", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--timeout", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-samples-split", dest="min_samples_split", type=int)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except EnumerationIncomplete as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
