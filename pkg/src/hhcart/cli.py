"""Command line: ``hhcart {train,predict,eval,probe}``."""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import tree as tree_mod
from .core import load_csv, read_schema
from .errors import HHCartError
from .evaluation import (EvalConfig, cross_validate, fit_pruned, format_probe, format_report,
                         scaling_probe, train_test)
from .splitter import SplitterParams
from .tree import GrowParams


def _default_seed() -> int:
    raw = os.environ.get("HHCART_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"hhcart: HHCART_SEED must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _add_grow_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=["A", "D", "AP"], default="A",
                   help="A: all eigenvectors, D: dominant only, AP: axis-parallel baseline")
    p.add_argument("--min-parent", type=int, default=2)
    p.add_argument("--mis-rate", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--min-oblique", type=float, default=2.0,
                   help="oblique search only when node size > this multiple of the feature count")
    p.add_argument("--prune-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None, help="defaults to $HHCART_SEED or 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hhcart", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    tr = sub.add_parser("train", help="grow and prune a tree, write a model file")
    tr.add_argument("--data", required=True)
    tr.add_argument("--schema", required=True)
    tr.add_argument("--out", required=True)
    _add_grow_args(tr)

    pr = sub.add_parser("predict", help="label every row of a CSV file")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", default="-", help="output CSV (default stdout)")

    ev = sub.add_parser("eval", help="repeated k-fold CV, or train/test with --test")
    ev.add_argument("--data", required=True)
    ev.add_argument("--schema", required=True)
    ev.add_argument("--test", help="fixed test file; switches to train/test evaluation")
    ev.add_argument("--name", help="dataset name in the report (default: file stem)")
    ev.add_argument("--folds", type=int, default=5)
    ev.add_argument("--repeats", type=int, default=10)
    ev.add_argument("--jobs", type=int, default=1)
    ev.add_argument("--out", help="report table file")
    ev.add_argument("--record-time", action="store_true",
                    help="write wall times into the report file (makes it run-dependent)")
    _add_grow_args(ev)

    pb = sub.add_parser("probe", help="time single-node split search over a (p, n) grid")
    pb.add_argument("--p", type=_int_list, default=[8, 16, 32])
    pb.add_argument("--n", type=_int_list, default=[500, 1000, 2000])
    pb.add_argument("--classes", type=int, default=2)
    pb.add_argument("--variant", choices=["A", "D", "both"], default="both")
    pb.add_argument("--runs", type=int, default=5)
    pb.add_argument("--seed", type=int, default=None)
    pb.add_argument("--out")
    return parser


def _grow_params(args) -> GrowParams:
    sp = SplitterParams(variant=args.variant, tau=args.tau, min_oblique_n=args.min_oblique)
    return GrowParams(min_parent=args.min_parent, mis_rate=args.mis_rate, splitter=sp,
                      seed=args.seed)


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_train(args) -> int:
    ds = load_csv(args.data, read_schema(args.schema))
    params = _grow_params(args)
    tree, part = fit_pruned(ds, np.arange(ds.n), args.prune_fraction, params, args.seed)
    tree_mod.save(tree, args.out)
    acc = 100.0 * tree.accuracy(ds)
    strat = "" if part.stratified else " (unstratified holdout)"
    print(f"trained HHCART({args.variant}) on {len(part.grow_idx)} rows, pruned on "
          f"{len(part.prune_idx)}{strat}: {tree.size} leaves, depth {tree.depth()}, "
          f"training-file accuracy {acc:.1f}% -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = tree_mod.load(args.model)
    ds = load_csv(args.data, model.schema, require_labels=False, classes=model.classes)
    labels = model.predict_labels(ds)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["predicted"])
        w.writerows([lab] for lab in labels)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.out != "-" and ds.y is not None:
        acc = 100.0 * float(np.mean(model.predict(ds) == ds.y))
        print(f"{ds.n} predictions -> {args.out}; agreement with file labels {acc:.1f}%")
    return 0


def cmd_eval(args) -> int:
    schema = read_schema(args.schema)
    ds = load_csv(args.data, schema)
    cfg = EvalConfig(folds=args.folds, repeats=args.repeats,
                     prune_fraction=args.prune_fraction, seed=args.seed, grow=_grow_params(args))
    name = args.name or _stem(args.data)
    if args.test:
        test = load_csv(args.test, schema, classes=ds.classes)
        report = train_test(ds, test, cfg, name)
    else:
        report = cross_validate(ds, cfg, name, jobs=args.jobs)
    text = format_report([report], timing=args.record_time)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    print(report.summary())
    return 0


def cmd_probe(args) -> int:
    variants = ["D", "A"] if args.variant == "both" else [args.variant]
    chunks = []
    for v in variants:
        rows, slopes = scaling_probe(args.p, args.n, args.classes, v, args.runs, args.seed)
        chunks.append(format_probe(rows, slopes))
        print(f"HHCART({v}): slope in p {slopes['slope_p']:.2f}, slope in n {slopes['slope_n']:.2f}")
    text = "".join(chunks)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "eval": cmd_eval, "probe": cmd_probe}


def run(argv=None) -> int:
    """Parse ``argv`` and dispatch; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "seed", "absent") is None:
        try:
            args.seed = _default_seed()
        except SystemExit as exc:
            print(exc, file=sys.stderr)
            return 2
    try:
        return COMMANDS[args.verb](args)
    except (HHCartError, OSError, ValueError) as exc:
        print(f"hhcart: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
