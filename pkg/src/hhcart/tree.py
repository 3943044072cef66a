"""Tree induction, prediction and model files."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from . import linalg
from .core import ClassDictionary, Dataset, FeatureSchema
from .crimcoord import CrimcoordMap, apply_crimcoords, fill_crimcoords, fit_crimcoord
from .errors import CorruptModel, FormatVersionMismatch, NoValidSplit, SchemaMismatch
from .splitter import NodeData, SplitterParams, find_best_split

FORMAT_NAME = "hhcart-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class GrowParams:
    min_parent: int = 2
    mis_rate: float = 0.0
    splitter: SplitterParams = field(default_factory=SplitterParams)
    seed: int = 0

    def __post_init__(self):
        if self.min_parent < 2:
            raise ValueError("min_parent must be at least 2")
        if not 0.0 <= self.mis_rate < 1.0:
            raise ValueError("mis_rate must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> GrowParams:
        d = dict(d)
        d["splitter"] = SplitterParams(**d["splitter"])
        return cls(**d)


@dataclass(frozen=True)
class Split:
    weights: np.ndarray
    threshold: float
    crim_maps: tuple[CrimcoordMap, ...] = ()
    origin: str = "axis_parallel"

    def goes_left(self, E: np.ndarray) -> np.ndarray:
        return linalg.project(E, self.weights) <= self.threshold

    def route_row(self, row) -> bool:
        x = apply_crimcoords(self.crim_maps, row)
        return bool(self.goes_left(x[None, :])[0])


@dataclass
class TreeNode:
    id: int
    histogram: np.ndarray
    split: Split | None = None
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def n(self) -> int:
        return int(self.histogram.sum())

    @property
    def label(self) -> int:
        # argmax returns the lowest index among ties
        return int(np.argmax(self.histogram))

    @property
    def misclassified(self) -> int:
        return self.n - int(self.histogram.max())

    @property
    def mis_rate(self) -> float:
        return self.misclassified / self.n if self.n else 0.0

    def walk(self) -> Iterator[TreeNode]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)


@dataclass
class Tree:
    root: TreeNode
    schema: FeatureSchema
    classes: ClassDictionary
    params: GrowParams = field(default_factory=GrowParams)

    def nodes(self) -> list[TreeNode]:
        return list(self.root.walk())

    def leaves(self) -> list[TreeNode]:
        return [nd for nd in self.root.walk() if nd.is_leaf]

    @property
    def size(self) -> int:
        return tree_size(self)

    def depth(self) -> int:
        best, stack = 0, [(self.root, 0)]
        while stack:
            nd, d = stack.pop()
            best = max(best, d)
            if not nd.is_leaf:
                stack += [(nd.left, d + 1), (nd.right, d + 1)]
        return best

    def predict(self, ds: Dataset) -> np.ndarray:
        """Class indices for every row of ``ds``."""
        return predict_codes(self, ds)

    def predict_labels(self, ds: Dataset) -> list[str]:
        return self.classes.decode(predict_codes(self, ds))

    def accuracy(self, ds: Dataset) -> float:
        return float(np.mean(predict_codes(self, ds) == ds.y))

    def errors(self, ds: Dataset) -> int:
        return int(np.sum(predict_codes(self, ds) != ds.y))


def tree_size(tree: Tree) -> int:
    """Number of terminal nodes."""
    return sum(1 for nd in tree.root.walk() if nd.is_leaf)


def _base_matrix(ds: Dataset) -> tuple[np.ndarray, dict]:
    base = np.zeros((ds.n, ds.p))
    tokens = {}
    for j, (f, col) in enumerate(zip(ds.schema.features, ds.columns)):
        if f.is_qualitative:
            tokens[j] = col
        else:
            base[:, j] = col
    return base, tokens


def grow(ds: Dataset, params: GrowParams | None = None, indices=None) -> Tree:
    """Grow an unpruned tree on ``ds`` (restricted to ``indices`` if given).

    A node becomes a leaf when its misclassification rate is at most
    ``mis_rate``, when it holds at most ``min_parent`` examples, when no split
    improves impurity, or when the best split leaves one side empty.
    """
    params = params or GrowParams()
    if ds.y is None:
        raise SchemaMismatch("growing needs labelled data")
    idx = np.arange(ds.n) if indices is None else np.asarray(indices, dtype=np.intp)
    if len(idx) == 0:
        raise ValueError("grow set is empty")
    base, tokens = _base_matrix(ds)
    qual = ds.schema.qualitative_indices
    C = len(ds.classes)
    next_id = 0

    def make(rows):
        return TreeNode(-1, np.bincount(ds.y[rows], minlength=C))

    root = make(idx)
    stack = [(root, idx)]
    while stack:
        node, rows = stack.pop()
        # ids are handed out on visit, giving pre-order numbering
        node.id = next_id
        next_id += 1
        if node.mis_rate <= params.mis_rate or node.n <= params.min_parent:
            continue
        maps = tuple(fit_crimcoord(tokens[j][rows], ds.y[rows], ds.schema.features[j].name, j)
                     for j in qual)
        E = fill_crimcoords(base, tokens, rows, maps)
        try:
            cand = find_best_split(NodeData(E, ds.y[rows], C), params.splitter)
        except NoValidSplit:
            continue
        split = Split(cand.weights, cand.threshold, maps, cand.origin)
        mask = split.goes_left(E)
        if mask.all() or not mask.any():
            continue
        node.split = split
        node.left = make(rows[mask])
        node.right = make(rows[~mask])
        # push right first so the left subtree is visited first
        stack.append((node.right, rows[~mask]))
        stack.append((node.left, rows[mask]))
    return Tree(root, ds.schema, ds.classes, params)


def _check_schema(tree: Tree, ds: Dataset):
    if ds.schema.features != tree.schema.features:
        raise SchemaMismatch("data schema differs from the model schema")


def predict_codes(tree: Tree, ds: Dataset) -> np.ndarray:
    _check_schema(tree, ds)
    base, tokens = _base_matrix(ds)
    out = np.empty(ds.n, dtype=np.intp)
    stack = [(tree.root, np.arange(ds.n))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        if node.is_leaf:
            out[rows] = node.label
            continue
        E = fill_crimcoords(base, tokens, rows, node.split.crim_maps)
        mask = node.split.goes_left(E)
        stack.append((node.left, rows[mask]))
        stack.append((node.right, rows[~mask]))
    return out


def predict(tree: Tree, row) -> str:
    """Label for one mixed feature vector in schema order."""
    if len(row) != tree.schema.p:
        raise SchemaMismatch(f"row has {len(row)} values, schema has {tree.schema.p}")
    qual = set(tree.schema.qualitative_indices)
    row = [str(v) if j in qual else float(v) for j, v in enumerate(row)]
    node = tree.root
    while not node.is_leaf:
        node = node.left if node.split.route_row(row) else node.right
    return tree.classes.classes[node.label]


def leaf_ids(tree: Tree, ds: Dataset) -> np.ndarray:
    """Id of the leaf each row of ``ds`` reaches."""
    _check_schema(tree, ds)
    base, tokens = _base_matrix(ds)
    out = np.empty(ds.n, dtype=np.intp)
    stack = [(tree.root, np.arange(ds.n))]
    while stack:
        node, rows = stack.pop()
        if node.is_leaf:
            out[rows] = node.id
            continue
        mask = node.split.goes_left(fill_crimcoords(base, tokens, rows, node.split.crim_maps))
        stack += [(node.left, rows[mask]), (node.right, rows[~mask])]
    return out


def copy_tree(tree: Tree, collapse=frozenset()) -> Tree:
    """Deep copy of ``tree``; nodes whose id is in ``collapse`` become leaves."""
    def clone(nd: TreeNode) -> TreeNode:
        new = TreeNode(nd.id, nd.histogram.copy())
        if not nd.is_leaf and nd.id not in collapse:
            new.split = nd.split
            new.left = clone(nd.left)
            new.right = clone(nd.right)
        return new
    return replace(tree, root=clone(tree.root))


# -- model files ----------------------------------------------------------

def to_dict(tree: Tree) -> dict:
    nodes = []
    for nd in sorted(tree.root.walk(), key=lambda n: n.id):
        rec = {"id": nd.id, "kind": "leaf" if nd.is_leaf else "internal",
               "label": tree.classes.classes[nd.label],
               "histogram": [int(v) for v in nd.histogram]}
        if not nd.is_leaf:
            rec.update({
                "weights": [float(w) for w in nd.split.weights],
                "threshold": float(nd.split.threshold),
                "origin": nd.split.origin,
                "crim_maps": [m.to_dict() for m in nd.split.crim_maps],
                "children": [nd.left.id, nd.right.id],
            })
        nodes.append(rec)
    return {"format": FORMAT_NAME, "version": FORMAT_VERSION,
            "schema": tree.schema.to_dict(), "classes": list(tree.classes.classes),
            "params": tree.params.to_dict(), "root": tree.root.id, "nodes": nodes}


def from_dict(doc: dict) -> Tree:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise CorruptModel("not an hhcart model document")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"model format version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    try:
        schema = FeatureSchema.from_dict(doc["schema"])
        classes = ClassDictionary(tuple(doc["classes"]))
        params = GrowParams.from_dict(doc["params"])
        recs = {int(r["id"]): r for r in doc["nodes"]}
        if len(recs) != len(doc["nodes"]):
            raise CorruptModel("duplicate node ids")
        seen = set()

        def build(i: int) -> TreeNode:
            if i in seen:
                raise CorruptModel(f"node {i} reached twice")
            seen.add(i)
            r = recs[i]
            hist = np.array(r["histogram"], dtype=np.int64)
            if hist.shape != (len(classes),):
                raise CorruptModel(f"node {i}: histogram length mismatch")
            nd = TreeNode(i, hist)
            if r["kind"] == "internal":
                w = np.array(r["weights"], dtype=np.float64)
                if w.shape != (schema.p,):
                    raise CorruptModel(f"node {i}: weight length mismatch")
                maps = tuple(CrimcoordMap.from_dict(m) for m in r["crim_maps"])
                nd.split = Split(w, float(r["threshold"]), maps, r.get("origin", "axis_parallel"))
                left, right = r["children"]
                nd.left, nd.right = build(int(left)), build(int(right))
            elif r["kind"] != "leaf":
                raise CorruptModel(f"node {i}: unknown kind {r['kind']!r}")
            return nd

        root = build(int(doc["root"]))
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModel(f"malformed model: {exc!r}") from None
    return Tree(root, schema, classes, params)


def dumps(tree: Tree) -> str:
    return json.dumps(to_dict(tree), indent=1, ensure_ascii=False) + "\n"


def loads(text: str) -> Tree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from None
    return from_dict(doc)


def save(tree: Tree, path) -> None:
    Path(path).write_text(dumps(tree), encoding="utf-8")


def load(path) -> Tree:
    return loads(Path(path).read_text(encoding="utf-8"))
