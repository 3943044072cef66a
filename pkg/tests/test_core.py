import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhcart.core import (ClassDictionary, Dataset, FeatureSchema, load_csv, parse_schema,
                         read_schema, split_holdout, write_csv)
from hhcart.datasets import builtin_paths
from hhcart.errors import EmptyDataset, MissingColumn, ParseFailure, SchemaError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def schema2():
    return FeatureSchema.build(["a", "b"], class_column="cls")


def test_load_small_numeric(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,b,cls\n1,2,x\n3,4,y\n5,6,x\n7.5,-8,z\n")
    ds = load_csv(f, schema2)
    assert (ds.n, ds.p) == (4, 2)
    assert ds.classes.classes == ("x", "y", "z")
    assert ds.y.tolist() == [0, 1, 0, 2]
    assert ds.columns[0].tolist() == [1.0, 3.0, 5.0, 7.5]


def test_non_numeric_token_is_parse_failure(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,b,cls\n1,2,x\n3,oops,y\n")
    with pytest.raises(ParseFailure) as info:
        load_csv(f, schema2)
    assert info.value.row == 2 and info.value.column == "b"


def test_empty_cell_rejected(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,b,cls\n1,,x\n")
    with pytest.raises(ParseFailure):
        load_csv(f, schema2)


def test_missing_column(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,cls\n1,x\n")
    with pytest.raises(MissingColumn):
        load_csv(f, schema2)


def test_header_only_is_empty(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,b,cls\n")
    with pytest.raises(EmptyDataset):
        load_csv(f, schema2)


def test_unlabeled_load(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "b,a\n1,2\n")
    ds = load_csv(f, schema2, require_labels=False)
    assert ds.y is None
    assert ds.row(0) == [2.0, 1.0]


def test_breast_cancer_shape():
    csv_path, schema_path = builtin_paths("breast_cancer")
    ds = load_csv(csv_path, read_schema(schema_path))
    # 699 biopsies minus 16 with a missing bare-nuclei score
    assert ds.p == 9 and len(ds.classes) == 2 and ds.n == 683
    assert ds.class_counts().tolist() == [444, 239]


def test_schema_text_roundtrip():
    text = "age,q\ncolour,c\n# comment\n\nlabel,label\n"
    s = parse_schema(text)
    assert s.names == ["age", "colour"] and s.class_column == "label"
    assert s.qualitative_indices == [1]
    assert parse_schema(s.to_text()) == s


@pytest.mark.parametrize("text", ["a,q\n", "a,q\na,q\ny,label\n", "a,z\ny,label\n",
                                  "y,label\n", "y,q\ny,label\n"])
def test_bad_schema(text):
    with pytest.raises(SchemaError):
        parse_schema(text)


def test_class_dictionary_first_appearance():
    cd = ClassDictionary.from_labels(["b", "a", "b", "c"])
    assert cd.classes == ("b", "a", "c")
    assert cd.encode(["c", "b"]).tolist() == [2, 0]
    assert cd.decode([1]) == ["a"]


def test_reload_gives_same_indices(tmp_path, schema2):
    f = _write(tmp_path / "d.csv", "a,b,cls\n1,2,q\n3,4,p\n")
    assert load_csv(f, schema2).y.tolist() == load_csv(f, schema2).y.tolist() == [0, 1]


def test_csv_roundtrip_mixed(tmp_path):
    schema = FeatureSchema.build(["x"], ["colour"], class_column="k")
    ds = Dataset.from_arrays([[0.1, "red"], [1e-300, "blue"], [-2.5, "red"]], ["u", "v", "u"],
                             schema)
    write_csv(ds, tmp_path / "o.csv")
    back = load_csv(tmp_path / "o.csv", schema)
    assert back.same_content(ds)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False, width=64),
                          st.sampled_from(["a", "b", "c"]),
                          st.sampled_from(["yes", "no"])), min_size=1, max_size=30))
def test_csv_roundtrip_property(tmp_path_factory, rows):
    schema = FeatureSchema.build(["x"], ["lvl"], class_column="y")
    ds = Dataset.from_arrays([[r[0], r[1]] for r in rows], [r[2] for r in rows], schema)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(ds, path)
    assert load_csv(path, schema).same_content(ds)


def _toy(n, n_classes=2):
    X = np.arange(n, dtype=float)[:, None]
    y = [f"c{i % n_classes}" for i in range(n)]
    return Dataset.from_arrays(X, y)


def test_holdout_cardinality():
    part = split_holdout(_toy(100), 0.1, seed=1)
    assert len(part.prune_idx) == 10
    assert not set(part.prune_idx) & set(part.grow_idx)
    assert sorted(np.concatenate([part.grow_idx, part.prune_idx])) == list(range(100))
    assert part.stratified


def test_holdout_is_stratified():
    ds = _toy(100)
    part = split_holdout(ds, 0.1, seed=3)
    assert np.bincount(ds.y[part.prune_idx]).tolist() == [5, 5]


def test_holdout_zero_fraction():
    part = split_holdout(_toy(10), 0.0, seed=1)
    assert len(part.prune_idx) == 0 and len(part.grow_idx) == 10


def test_holdout_deterministic():
    ds = _toy(57, 3)
    a, b = split_holdout(ds, 0.2, seed=9), split_holdout(ds, 0.2, seed=9)
    assert np.array_equal(a.prune_idx, b.prune_idx)
    assert np.array_equal(a.grow_idx, b.grow_idx)
    c = split_holdout(ds, 0.2, seed=10)
    assert not np.array_equal(a.prune_idx, c.prune_idx)


def test_holdout_falls_back_when_class_too_small():
    # quotas 0.5, 0.5, 1: the remainder row goes to "a", emptying it
    X = np.arange(4, dtype=float)[:, None]
    ds = Dataset.from_arrays(X, ["a", "b", "c", "c"])
    part = split_holdout(ds, 0.5, seed=0)
    assert len(part.prune_idx) == 2
    assert not part.stratified


def test_holdout_needs_one_row():
    with pytest.raises(ValueError):
        split_holdout(_toy(5), 0.1, seed=0)


def test_holdout_within_subset():
    ds = _toy(40)
    sub = np.arange(0, 40, 2)
    part = split_holdout(ds, 0.25, seed=0, indices=sub)
    assert set(part.grow_idx) | set(part.prune_idx) == set(sub.tolist())
    assert len(part.prune_idx) == 5
