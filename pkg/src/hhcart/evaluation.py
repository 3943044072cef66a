"""Repeated k-fold cross-validation, fixed train/test runs and timing probes."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Dataset, split_holdout
from .errors import SchemaMismatch
from .prune import prune_sequence, select_subtree
from .splitter import NodeData, SplitterParams, find_best_split
from .tree import GrowParams, grow

REPORT_COLUMNS = ["dataset", "variant", "repeat", "fold", "mean_acc", "sd_acc",
                  "mean_size", "sd_size", "runtime_s"]


@dataclass(frozen=True)
class EvalConfig:
    folds: int = 5
    repeats: int = 10
    prune_fraction: float = 0.1
    seed: int = 0
    grow: GrowParams = field(default_factory=GrowParams)

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.repeats < 1:
            raise ValueError("need at least 1 repeat")
        if not 0.0 <= self.prune_fraction <= 0.5:
            raise ValueError("prune_fraction must lie in [0, 0.5]")

    @property
    def variant(self) -> str:
        return self.grow.splitter.variant

    def with_variant(self, variant: str) -> EvalConfig:
        sp = replace(self.grow.splitter, variant=variant)
        return replace(self, grow=replace(self.grow, splitter=sp))


@dataclass(frozen=True)
class RunRecord:
    repeat: int
    fold: int
    n_test: int
    correct: int
    size: int
    seconds: float
    holdout_stratified: bool = True

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.n_test


@dataclass
class EvalReport:
    dataset: str
    variant: str
    mean_acc: float
    sd_acc: float
    mean_size: float
    sd_size: float
    runs: list[RunRecord]
    wall_time: float
    flags: dict = field(default_factory=dict)

    def summary(self) -> str:
        notes = ", ".join(f"{k}={v}" for k, v in sorted(self.flags.items()))
        return (f"{self.dataset} [{self.variant}] acc {self.mean_acc:.1f} +/- {self.sd_acc:.1f}%  "
                f"size {self.mean_size:.1f} +/- {self.sd_size:.1f} leaves  "
                f"({len(self.runs)} runs, {self.wall_time:.1f}s; {notes})")


def _sd(values) -> float:
    return statistics.stdev(values) if len(values) > 1 else 0.0


def aggregate(dataset: str, variant: str, runs: list[RunRecord], wall_time: float = 0.0,
              flags: dict | None = None) -> EvalReport:
    """Summarise per-run records.

    Accuracy per repeat is pooled over that repeat's test folds; size per
    repeat is the mean pruned size of its folds. Reported means and sample
    standard deviations are taken over the repeat-level values.
    """
    runs = sorted(runs, key=lambda r: (r.repeat, r.fold))
    accs, sizes = [], []
    for rep in sorted({r.repeat for r in runs}):
        rr = [r for r in runs if r.repeat == rep]
        accs.append(100.0 * sum(r.correct for r in rr) / sum(r.n_test for r in rr))
        sizes.append(statistics.fmean(r.size for r in rr))
    flags = dict(flags or {})
    flags["holdout_stratified"] = all(r.holdout_stratified for r in runs)
    return EvalReport(dataset, variant, statistics.fmean(accs), _sd(accs),
                      statistics.fmean(sizes), _sd(sizes), runs, wall_time, flags)


def stratified_folds(y, k: int, seed) -> tuple[list[np.ndarray], bool]:
    """Split row indices into ``k`` class-stratified folds.

    Rows of each class are shuffled and dealt round-robin, continuing the
    deal across classes so fold sizes differ by at most one. The flag is
    False when some class has fewer than ``k`` rows.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    ok = True
    for c in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == c))
        ok &= len(members) >= k
        for i in members:
            buckets[pos % k].append(int(i))
            pos += 1
    return [np.sort(np.array(b, dtype=np.intp)) for b in buckets], bool(ok)


def fit_pruned(ds: Dataset, train_idx, prune_fraction: float, params: GrowParams, seed):
    """Grow on part of ``train_idx`` and prune on the rest; returns (tree, partition)."""
    part = split_holdout(ds, prune_fraction, seed, indices=train_idx)
    full = grow(ds, params, part.grow_idx)
    prune_set = ds.subset(part.prune_idx) if len(part.prune_idx) else None
    return select_subtree(prune_sequence(full), prune_set).tree, part


def _run_fold(args) -> RunRecord:
    ds, cfg, rep, fold, train_idx, test_idx = args
    t0 = time.perf_counter()
    tree, part = fit_pruned(ds, train_idx, cfg.prune_fraction, cfg.grow, (cfg.seed + rep, fold))
    test = ds.subset(test_idx)
    correct = int(np.sum(tree.predict(test) == test.y))
    return RunRecord(rep, fold, len(test_idx), correct, tree.size,
                     time.perf_counter() - t0, part.stratified)


def _execute(tasks, jobs: int) -> list[RunRecord]:
    if jobs <= 1:
        return [_run_fold(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_fold, tasks))


def cross_validate(ds: Dataset, cfg: EvalConfig, name: str = "dataset", jobs: int = 1) -> EvalReport:
    """Repeated stratified k-fold CV with a per-fold pruning holdout.

    Repeat ``r`` draws its folds with seed ``cfg.seed + r``; each fold's
    training part gives up ``prune_fraction`` of its rows for pruning.
    """
    t0 = time.perf_counter()
    tasks = []
    folds_ok = True
    for rep in range(cfg.repeats):
        folds, ok = stratified_folds(ds.y, cfg.folds, cfg.seed + rep)
        folds_ok &= ok
        for f, test_idx in enumerate(folds):
            train_idx = np.setdiff1d(np.arange(ds.n), test_idx)
            tasks.append((ds, cfg, rep, f, train_idx, test_idx))
    runs = _execute(tasks, jobs)
    flags = {"folds_stratified": True, "class_too_small": not folds_ok}
    return aggregate(name, cfg.variant, runs, time.perf_counter() - t0, flags)


def train_test(train: Dataset, test: Dataset, cfg: EvalConfig, name: str = "dataset") -> EvalReport:
    """``cfg.repeats`` trees, each with a fresh pruning holdout, scored on ``test``."""
    if train.schema != test.schema:
        raise SchemaMismatch("train and test schemas differ")
    if test.y is None or test.classes.classes != train.classes.classes:
        if test.y is None:
            raise SchemaMismatch("test set has no labels")
        test = Dataset(test.schema, test.columns,
                       train.classes.encode(test.labels), train.classes)
    t0 = time.perf_counter()
    runs = []
    for rep in range(cfg.repeats):
        s0 = time.perf_counter()
        tree, part = fit_pruned(train, np.arange(train.n), cfg.prune_fraction, cfg.grow,
                                (cfg.seed + rep, 0))
        correct = int(np.sum(tree.predict(test) == test.y))
        runs.append(RunRecord(rep, 0, test.n, correct, tree.size,
                              time.perf_counter() - s0, part.stratified))
    return aggregate(name, cfg.variant, runs, time.perf_counter() - t0)


# -- reports --------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.4f}"


def report_rows(report: EvalReport, timing: bool = True) -> list[list[str]]:
    rt = _fmt(report.wall_time) if timing else ""
    rows = [[report.dataset, report.variant, "all", "all", _fmt(report.mean_acc),
             _fmt(report.sd_acc), _fmt(report.mean_size), _fmt(report.sd_size), rt]]
    for r in report.runs:
        rows.append([report.dataset, report.variant, str(r.repeat), str(r.fold),
                     _fmt(r.accuracy), "", str(r.size), "", _fmt(r.seconds) if timing else ""])
    return rows


def format_report(reports: list[EvalReport], timing: bool = True) -> str:
    """Delimited table: one summary row per report followed by its run rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for rep in reports:
        w.writerows(report_rows(rep, timing))
    return buf.getvalue()


def write_report(reports: list[EvalReport], path, timing: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_report(reports, timing))


# -- complexity probes ----------------------------------------------------

@dataclass(frozen=True)
class ProbeRow:
    variant: str
    p: int
    n: int
    classes: int
    median_s: float


def synthetic_node(n: int, p: int, n_classes: int, seed: int = 0) -> NodeData:
    """Gaussian classes with random rotated covariances and shifted means."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % n_classes
    X = np.empty((n, p))
    for c in range(n_classes):
        Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
        scales = np.linspace(1.0, 3.0, p)
        rows = y == c
        X[rows] = (rng.standard_normal((rows.sum(), p)) * scales) @ Q.T + rng.standard_normal(p)
    return NodeData(X, y, n_classes)


def time_split(node: NodeData, params: SplitterParams, runs: int = 5) -> float:
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        find_best_split(node, params)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def loglog_slope(xs, ts) -> float:
    lx = np.log(np.asarray(xs, dtype=float))
    lt = np.log(np.asarray(ts, dtype=float))
    if len(lx) < 2:
        return math.nan
    return float(np.polyfit(lx, lt, 1)[0])


def scaling_probe(p_list, n_list, n_classes: int = 2, variant: str = "A", runs: int = 5,
                  seed: int = 0, tau: float = 0.05) -> tuple[list[ProbeRow], dict]:
    """Median single-node split time over a (p, n) grid.

    Returns the rows and the fitted log-log slopes: ``slope_p`` at the largest
    n and ``slope_n`` at the largest p.
    """
    params = SplitterParams(variant=variant, tau=tau)
    rows = []
    for p in p_list:
        for n in n_list:
            node = synthetic_node(n, p, n_classes, seed)
            rows.append(ProbeRow(variant, p, n, n_classes, time_split(node, params, runs)))
    n_top, p_top = max(n_list), max(p_list)
    by_p = sorted((r.p, r.median_s) for r in rows if r.n == n_top)
    by_n = sorted((r.n, r.median_s) for r in rows if r.p == p_top)
    slopes = {"slope_p": loglog_slope(*zip(*by_p)) if len(by_p) > 1 else math.nan,
              "slope_n": loglog_slope(*zip(*by_n)) if len(by_n) > 1 else math.nan}
    return rows, slopes


def format_probe(rows: list[ProbeRow], slopes: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "p", "n", "classes", "median_s"])
    for r in rows:
        w.writerow([r.variant, r.p, r.n, r.classes, f"{r.median_s:.6f}"])
    for k, v in sorted(slopes.items()):
        w.writerow([f"# {k}", f"{v:.3f}"])
    return buf.getvalue()
