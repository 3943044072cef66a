"""Acceptance gate: each criterion runs at its stated tolerance and reports one line."""

import os
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from hhcart import linalg
from hhcart import tree as tm
from hhcart.core import Dataset, FeatureSchema, load_csv, read_schema
from hhcart.errors import NoValidSplit
from hhcart.evaluation import (EvalConfig, cross_validate, stratified_folds, synthetic_node,
                               time_split)
from hhcart.prune import prune_sequence
from hhcart.splitter import NodeData, SplitterParams, candidate_bases, find_best_split
from hhcart.tree import GrowParams, grow

CV = EvalConfig(folds=5, repeats=10, prune_fraction=0.1, seed=0,
                grow=GrowParams(min_parent=2, mis_rate=0.0, splitter=SplitterParams("A", tau=0.05)))


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
    assert ok, detail


def _timed_cv(ds, cfg, name):
    t0 = time.perf_counter()
    rep = cross_validate(ds, cfg, name)
    return rep, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_1_breast_cancer(bc):
    rep, secs = _timed_cv(bc, CV, "breast_cancer")
    ok = rep.mean_acc >= 95.5 and rep.mean_size <= 4.5 and secs < 120
    record("1 breast cancer A", ok,
           f"acc {rep.mean_acc:.2f}+/-{rep.sd_acc:.2f} (>=95.5), size {rep.mean_size:.2f} "
           f"(<=4.5), {secs:.1f}s (<120)")


@pytest.mark.slow
def test_criterion_2_balance_scale(balance):
    a, secs = _timed_cv(balance, CV, "balance_scale")
    ap, _ = _timed_cv(balance, CV.with_variant("AP"), "balance_scale")
    ok = (a.mean_acc >= 91.0 and ap.mean_acc <= 85.0 and ap.mean_size >= 2 * a.mean_size
          and secs < 120)
    record("2 balance scale A vs AP", ok,
           f"A acc {a.mean_acc:.2f} (>=91) size {a.mean_size:.2f}; AP acc {ap.mean_acc:.2f} "
           f"(<=85) size {ap.mean_size:.2f} (>= {2 * a.mean_size:.2f}); A {secs:.1f}s (<120)")


@pytest.mark.slow
def test_criterion_3_wine(wine):
    rep, secs = _timed_cv(wine, CV, "wine")
    ok = rep.mean_acc >= 88.0 and rep.mean_size <= 6.0 and secs < 60
    record("3 wine A", ok,
           f"acc {rep.mean_acc:.2f}+/-{rep.sd_acc:.2f} (>=88), size {rep.mean_size:.2f} (<=6), "
           f"{secs:.1f}s (<60)")


def _node_rows(tree, ds):
    """Row indices of ``ds`` reaching every node, keyed by node id."""
    X = ds.quantitative_matrix()
    out = {}
    stack = [(tree.root, np.arange(ds.n))]
    while stack:
        nd, rows = stack.pop()
        out[nd.id] = rows
        if not nd.is_leaf:
            mask = nd.split.goes_left(X[rows])
            stack += [(nd.left, rows[mask]), (nd.right, rows[~mask])]
    return out


def _gain(node, variant):
    try:
        return find_best_split(node, SplitterParams(variant)).gain
    except NoValidSplit:
        return 0.0


@pytest.mark.slow
def test_criterion_4_variant_contrast(bc, wine, balance):
    checked, bad = 0, []
    for name, ds in (("breast_cancer", bc), ("wine", wine), ("balance_scale", balance)):
        X = ds.quantitative_matrix()
        seen = set()
        trees = [grow(ds, GrowParams(splitter=SplitterParams(v))) for v in ("A", "D")]
        # fold training sets of the first CV repeat as extra root nodes
        folds, _ = stratified_folds(ds.y, 5, 0)
        node_sets = [np.setdiff1d(np.arange(ds.n), f) for f in folds]
        for t in trees:
            node_sets += [r for r in _node_rows(t, ds).values() if len(r) >= 2]
        for rows in node_sets:
            key = rows.tobytes()
            if key in seen:
                continue
            seen.add(key)
            node = NodeData(X[rows], ds.y[rows], len(ds.classes))
            ga, gd = _gain(node, "A"), _gain(node, "D")
            checked += 1
            if gd > ga:
                bad.append((name, len(rows), gd, ga))
    node = synthetic_node(2000, 32, 2, seed=0)
    ta = time_split(node, SplitterParams("A"), runs=3)
    td = time_split(node, SplitterParams("D"), runs=3)
    ok = not bad and td < ta
    record("4 variant contrast", ok,
           f"{checked} node datasets, D gain > A gain on {len(bad)}; "
           f"p=32 n=2000 split time D {td:.3f}s vs A {ta:.3f}s")


def test_criterion_5_property_suites():
    rng = np.random.default_rng(20240501)
    # (a) Householder invariants
    worst_h = 0.0
    for _ in range(1000):
        p = int(rng.integers(2, 9))
        d = rng.standard_normal(p)
        d /= np.linalg.norm(d)
        H = linalg.householder(d).H
        e1 = np.eye(p)[0]
        worst_h = max(worst_h, np.abs(H - H.T).max(), np.abs(H @ H - np.eye(p)).max(),
                      np.abs(H @ d - e1).max())
    ok_a = worst_h <= 1e-10
    # (b) eigen residuals
    worst_e = 0.0
    for _ in range(1000):
        p = int(rng.integers(1, 9))
        A = rng.standard_normal((p, p))
        S = (A + A.T) / 2
        for e in linalg.symmetric_eigen(S):
            worst_e = max(worst_e, np.linalg.norm(S @ e.vector - e.value * e.vector))
    ok_b = worst_e <= 1e-8
    # (c) oracle equivalence on random small nodes
    mismatches = 0
    for _ in range(200):
        n, p, C = int(rng.integers(2, 51)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
        X = rng.standard_normal((n, p))
        if rng.random() < 0.5:
            X = np.round(X * 2) / 2
        y = rng.integers(0, C, n)
        y[0], y[-1] = 0, 1
        node = NodeData(X, y, C)
        params = SplitterParams(str(rng.choice(["A", "D"])))
        dirs = [H[:, k] for _, H in candidate_bases(node, params) for k in range(p)]
        best = oracles.brute_force_best(X, y, C, dirs)
        try:
            cand = find_best_split(node, params)
            exact = oracles.split_gain_exact(X, y, C, cand.weights, cand.threshold)
            if exact != best or cand.gain != pytest.approx(float(best), abs=1e-12):
                mismatches += 1
        except NoValidSplit:
            if best > 0:
                mismatches += 1
    ok_c = mismatches == 0
    # (d) pruning sequence monotonicity
    bad_seq = 0
    for _ in range(100):
        n = int(rng.integers(20, 120))
        X = np.round(rng.standard_normal((n, int(rng.integers(1, 4)))), 1)
        ds = Dataset.from_arrays(X, [f"c{v}" for v in rng.integers(0, 3, n)])
        seq = prune_sequence(grow(ds))
        if not (all(a < b for a, b in zip(seq.alphas, seq.alphas[1:]))
                and all(a > b for a, b in zip(seq.sizes, seq.sizes[1:]))):
            bad_seq += 1
    ok_d = bad_seq == 0
    # (e) save/load round trip
    n = 150
    X = rng.standard_normal((n, 3))
    ds = Dataset.from_arrays(X, np.where(X[:, 0] + X[:, 1] * X[:, 2] > 0, "u", "v"))
    t = grow(ds)
    back = tm.loads(tm.dumps(t))
    ok_e = np.array_equal(back.predict(ds), t.predict(ds))
    ok = ok_a and ok_b and ok_c and ok_d and ok_e
    record("5 property suites", ok,
           f"(a) householder max err {worst_h:.1e}; (b) eigen max residual {worst_e:.1e}; "
           f"(c) {mismatches}/200 oracle mismatches; (d) {bad_seq}/100 bad sequences; "
           f"(e) round trip {'identical' if ok_e else 'DIFFERS'}")


def _three_level_dataset():
    rng = np.random.default_rng(6)
    colour = rng.choice(["red", "green", "blue"], 90)
    noise = rng.standard_normal(90)
    y = np.where(colour == "green", "no", "yes")
    schema = FeatureSchema.build(["noise"], ["colour"], class_column="y")
    return Dataset.from_arrays([[a, b] for a, b in zip(noise, colour)], y, schema)


def test_criterion_6_qualitative_feature():
    ds = _three_level_dataset()
    t = grow(ds)
    acc = t.accuracy(ds)
    ok = t.depth() == 1 and acc == 1.0
    record("6 qualitative feature", ok, f"depth {t.depth()}, training accuracy {100 * acc:.1f}%")


@pytest.mark.skipif(not os.environ.get("HHCART_CREDIT_CSV"),
                    reason="set HHCART_CREDIT_CSV and HHCART_CREDIT_SCHEMA to run the credit smoke test")
def test_criterion_6_credit_smoke():
    ds = load_csv(os.environ["HHCART_CREDIT_CSV"], read_schema(os.environ["HHCART_CREDIT_SCHEMA"]))
    rep, _ = _timed_cv(ds, CV, "credit")
    record("6 credit smoke", rep.mean_acc >= 83.0, f"acc {rep.mean_acc:.2f} (>=83)")
