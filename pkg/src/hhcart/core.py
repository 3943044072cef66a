"""Typed example tables: schema, class dictionary, CSV ingestion and holdout splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDataset, MissingColumn, ParseFailure, SchemaError, SchemaMismatch

QUANTITATIVE = "quantitative"
QUALITATIVE = "qualitative"

_KIND_CODES = {"q": QUANTITATIVE, "c": QUALITATIVE}


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str

    @property
    def is_qualitative(self) -> bool:
        return self.kind == QUALITATIVE


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]
    class_column: str

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if not names:
            raise SchemaError("schema needs at least one feature")
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if self.class_column in names:
            raise SchemaError(f"class column {self.class_column!r} listed as a feature")
        for f in self.features:
            if f.kind not in (QUANTITATIVE, QUALITATIVE):
                raise SchemaError(f"unknown feature kind {f.kind!r}")

    @classmethod
    def build(cls, quantitative: Sequence[str] = (), qualitative: Sequence[str] = (),
              class_column: str = "class") -> FeatureSchema:
        """Schema with the quantitative features first, then the qualitative ones."""
        feats = [Feature(n, QUANTITATIVE) for n in quantitative]
        feats += [Feature(n, QUALITATIVE) for n in qualitative]
        return cls(tuple(feats), class_column)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def p(self) -> int:
        return len(self.features)

    @property
    def qualitative_indices(self) -> list[int]:
        return [j for j, f in enumerate(self.features) if f.is_qualitative]

    def to_text(self) -> str:
        codes = {v: k for k, v in _KIND_CODES.items()}
        lines = [f"{f.name},{codes[f.kind]}" for f in self.features]
        lines.append(f"{self.class_column},label")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"features": [[f.name, f.kind] for f in self.features],
                "class_column": self.class_column}

    @classmethod
    def from_dict(cls, d: dict) -> FeatureSchema:
        return cls(tuple(Feature(n, k) for n, k in d["features"]), d["class_column"])


def parse_schema(text: str) -> FeatureSchema:
    """Parse the ``name,kind`` schema format (kind is q, c or label)."""
    features = []
    label = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, kind = line.rpartition(",")
        name, kind = name.strip(), kind.strip().lower()
        if not sep or not name:
            raise SchemaError(f"line {lineno}: expected 'name,kind', got {raw!r}")
        if kind == "label":
            if label is not None:
                raise SchemaError(f"line {lineno}: second label column {name!r}")
            label = name
        elif kind in _KIND_CODES:
            features.append(Feature(name, _KIND_CODES[kind]))
        else:
            raise SchemaError(f"line {lineno}: unknown kind {kind!r}")
    if label is None:
        raise SchemaError("schema has no label column")
    return FeatureSchema(tuple(features), label)


def read_schema(path) -> FeatureSchema:
    return parse_schema(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ClassDictionary:
    classes: tuple[str, ...]
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("class identifiers must be distinct")
        object.__setattr__(self, "index", {c: i for i, c in enumerate(self.classes)})

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> ClassDictionary:
        # dict preserves first-appearance order
        return cls(tuple(dict.fromkeys(labels)))

    def __len__(self):
        return len(self.classes)

    def encode(self, labels: Iterable[str]) -> np.ndarray:
        try:
            return np.array([self.index[lab] for lab in labels], dtype=np.intp)
        except KeyError as exc:
            raise SchemaMismatch(f"unknown class label {exc.args[0]!r}") from None

    def decode(self, codes: Iterable[int]) -> list[str]:
        return [self.classes[int(c)] for c in codes]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable column store.

    ``columns[j]`` is a float64 array for quantitative features and a
    str array of level tokens for qualitative ones. ``y`` holds dense class
    indices into ``classes`` and is None for unlabeled tables.
    """

    schema: FeatureSchema
    columns: tuple[np.ndarray, ...]
    y: np.ndarray | None
    classes: ClassDictionary

    def __post_init__(self):
        cols = []
        for f, col in zip(self.schema.features, self.columns):
            col = np.asarray(col, dtype=str if f.is_qualitative else np.float64)
            col.setflags(write=False)
            cols.append(col)
        if len(cols) != self.schema.p:
            raise SchemaMismatch(f"{len(cols)} columns for a {self.schema.p}-feature schema")
        lengths = {len(c) for c in cols}
        if len(lengths) != 1:
            raise SchemaMismatch("columns differ in length")
        n = lengths.pop()
        if n == 0:
            raise EmptyDataset("dataset has no rows")
        object.__setattr__(self, "columns", tuple(cols))
        if self.y is not None:
            y = np.asarray(self.y, dtype=np.intp)
            if len(y) != n:
                raise SchemaMismatch("label count differs from row count")
            if y.min() < 0 or y.max() >= len(self.classes):
                raise SchemaMismatch("label index outside the class dictionary")
            y.setflags(write=False)
            object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.columns[0])

    @property
    def p(self) -> int:
        return self.schema.p

    @property
    def labels(self) -> list[str]:
        return self.classes.decode(self.y)

    def row(self, i: int) -> list:
        return [c[i].item() if c.dtype.kind == "f" else str(c[i]) for c in self.columns]

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.schema, tuple(c[idx] for c in self.columns),
                       None if self.y is None else self.y[idx], self.classes)

    def quantitative_matrix(self) -> np.ndarray:
        """n x p float matrix; only valid when every feature is quantitative."""
        if self.schema.qualitative_indices:
            raise SchemaMismatch("dataset has qualitative features")
        return np.column_stack(self.columns)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=len(self.classes))

    def same_content(self, other: Dataset) -> bool:
        if self.schema != other.schema or self.classes.classes != other.classes.classes:
            return False
        if (self.y is None) != (other.y is None):
            return False
        if self.y is not None and not np.array_equal(self.y, other.y):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.columns, other.columns))

    @classmethod
    def from_arrays(cls, X, y, schema: FeatureSchema | None = None,
                    classes: ClassDictionary | None = None) -> Dataset:
        """Build from an n x p array (or list of mixed rows) and a label sequence."""
        rows = list(X)
        if not rows:
            raise EmptyDataset("dataset has no rows")
        if schema is None:
            schema = FeatureSchema.build([f"x{j}" for j in range(len(rows[0]))])
        labels = [str(v) for v in y]
        classes = classes or ClassDictionary.from_labels(labels)
        cols = tuple([r[j] for r in rows] for j in range(schema.p))
        return cls(schema, cols, classes.encode(labels), classes)


def load_csv(path, schema: FeatureSchema, require_labels: bool = True,
             classes: ClassDictionary | None = None) -> Dataset:
    """Read a headered CSV file into a :class:`Dataset`.

    Columns absent from the schema are ignored. Empty cells and unparsable
    quantitative cells raise :class:`ParseFailure`. When ``require_labels`` is
    False the class column may be absent and ``y`` is left as None.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path}: empty file") from None
        pos = {name: i for i, name in enumerate(header)}
        for name in schema.names:
            if name not in pos:
                raise MissingColumn(f"{path}: no column {name!r}")
        has_label = schema.class_column in pos
        if require_labels and not has_label:
            raise MissingColumn(f"{path}: no class column {schema.class_column!r}")

        cols: list[list] = [[] for _ in schema.features]
        raw_labels: list[str] = []
        for rowno, rec in enumerate(reader, 1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) < len(header):
                raise ParseFailure(rowno, header[len(rec)], None)
            for j, f in enumerate(schema.features):
                cell = rec[pos[f.name]].strip()
                if not cell:
                    raise ParseFailure(rowno, f.name, cell)
                if f.is_qualitative:
                    cols[j].append(cell)
                else:
                    try:
                        v = float(cell)
                    except ValueError:
                        raise ParseFailure(rowno, f.name, cell) from None
                    if not math.isfinite(v):
                        raise ParseFailure(rowno, f.name, cell)
                    cols[j].append(v)
            if has_label:
                lab = rec[pos[schema.class_column]].strip()
                if not lab:
                    raise ParseFailure(rowno, schema.class_column, lab)
                raw_labels.append(lab)

    if not cols[0]:
        raise EmptyDataset(f"{path}: no data rows")
    y = None
    if has_label and (require_labels or classes is None):
        classes = classes or ClassDictionary.from_labels(raw_labels)
        y = classes.encode(raw_labels)
    elif has_label and classes is not None:
        # unlabeled use with a known dictionary: keep labels only if all are known
        if all(lab in classes.index for lab in raw_labels):
            y = classes.encode(raw_labels)
    return Dataset(schema, tuple(cols), y, classes or ClassDictionary(()))


def write_csv(ds: Dataset, path) -> None:
    """Write ``ds`` so that :func:`load_csv` reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = ds.schema.names + ([ds.schema.class_column] if ds.y is not None else [])
        w.writerow(header)
        for i in range(ds.n):
            cells = [repr(v) if isinstance(v, float) else v for v in ds.row(i)]
            if ds.y is not None:
                cells.append(ds.classes.classes[ds.y[i]])
            w.writerow(cells)


@dataclass(frozen=True)
class DataPartition:
    grow_idx: np.ndarray
    prune_idx: np.ndarray
    test_idx: np.ndarray
    stratified: bool = True

    def __post_init__(self):
        sets = [set(map(int, a)) for a in (self.grow_idx, self.prune_idx, self.test_idx)]
        if len(self.grow_idx) == 0:
            raise ValueError("grow partition is empty")
        if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
            raise ValueError("partition index sets overlap")


def split_holdout(ds: Dataset, prune_fraction: float, seed: int, indices=None,
                  test_idx=None) -> DataPartition:
    """Carve ``floor(prune_fraction * n)`` rows out of ``indices`` for pruning.

    The holdout is stratified by class (largest-remainder allocation). When
    some class is too small to keep a grow row after its share is taken, the
    draw falls back to a plain random sample and ``stratified`` is False.
    """
    if not 0.0 <= prune_fraction < 1.0:
        raise ValueError("prune_fraction must lie in [0, 1)")
    idx = np.arange(ds.n) if indices is None else np.asarray(indices, dtype=np.intp)
    test = np.empty(0, dtype=np.intp) if test_idx is None else np.asarray(test_idx, dtype=np.intp)
    n = len(idx)
    k = int(math.floor(prune_fraction * n + 1e-9))
    if prune_fraction > 0 and k < 1:
        raise ValueError(f"prune_fraction {prune_fraction} leaves no pruning rows out of {n}")
    rng = np.random.default_rng(seed)
    if k == 0:
        return DataPartition(np.sort(idx), np.empty(0, dtype=np.intp), test)

    y = ds.y[idx]
    classes, counts = np.unique(y, return_counts=True)
    quota = counts * k / n
    alloc = np.floor(quota).astype(int)
    short = k - alloc.sum()
    if short:
        # largest remainder, ties to the lower class index
        order = sorted(range(len(classes)), key=lambda c: (-(quota[c] - alloc[c]), c))
        for c in order[:short]:
            alloc[c] += 1
    stratified = bool(np.all(alloc < counts))
    if stratified:
        picks = []
        for c, a in zip(classes, alloc):
            members = idx[y == c]
            picks.append(rng.permutation(members)[:a])
        prune = np.concatenate(picks)
    else:
        prune = rng.permutation(idx)[:k]
    grow = np.setdiff1d(idx, prune)
    return DataPartition(grow, np.sort(prune), test, stratified)
