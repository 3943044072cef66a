"""Best-split search at a single node.

Candidate hyperplanes come from axis-parallel cuts in the original feature
space and in Householder-reflected copies of the node data, one reflection per
(class, eigenvector) pair. A cut on reflected axis ``k`` is the oblique split
``H[:, k] . x <= c`` in the original space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import linalg
from .errors import ConvergenceFailure, DegenerateClass, NoValidSplit

VARIANTS = ("A", "D", "AP")
AXIS_PARALLEL = "axis_parallel"
REFLECTION = "reflection"


@dataclass(frozen=True)
class NodeData:
    X: np.ndarray
    y: np.ndarray
    n_classes: int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.intp)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"node data needs a non-empty 2-D matrix, got {X.shape}")
        if len(y) != X.shape[0]:
            raise ValueError("label count differs from row count")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError("class index outside 0..n_classes-1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def class_set(self) -> list[int]:
        return [int(c) for c in np.unique(self.y)]

    def histogram(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)


@dataclass(frozen=True)
class SplitterParams:
    variant: str = "A"
    tau: float = 0.05
    min_oblique_n: float = 2
    impurity: str = "twoing"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.min_oblique_n < 0:
            raise ValueError("min_oblique_n must be non-negative")
        if self.impurity != "twoing":
            raise ValueError("only the twoing rule is supported")


@dataclass(frozen=True)
class CandidateSplit:
    weights: np.ndarray
    threshold: float
    gain: float
    origin: str = AXIS_PARALLEL
    axis: int = 0
    class_index: int = -1
    eigen_index: int = -1

    @property
    def is_oblique(self) -> bool:
        return self.origin == REFLECTION


def twoing_gain(left, right) -> float:
    """Twoing criterion ``(P_L P_R / 4) * (sum_c |p(c|L) - p(c|R)|)^2``.

    ``left`` and ``right`` are per-class counts. An empty side scores 0.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    nl, nr = left.sum(), right.sum()
    if nl <= 0 or nr <= 0:
        return 0.0
    n = nl + nr
    s = np.abs(left / nl - right / nr).sum()
    return float((nl / n) * (nr / n) / 4.0 * s * s)


def _midpoint(a: float, b: float) -> float:
    m = a + (b - a) / 2.0
    # adjacent doubles can round onto b
    if not (a <= m < b):
        m = a
    return float(m)


def _sweep(Z: np.ndarray, y: np.ndarray, n_classes: int):
    """Best twoing cut over every column of ``Z``.

    Returns (gain, axis, threshold) or None when no column has two distinct
    values. Ties resolve to the lowest axis, then the smallest threshold.
    """
    n, p = Z.shape
    if n < 2:
        return None
    order = np.argsort(Z, axis=0, kind="stable")
    zs = np.take_along_axis(Z, order, axis=0)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    left = np.cumsum(onehot[order], axis=0)[:-1]          # (n-1, p, C)
    total = onehot.sum(axis=0)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    diff = np.abs(left / nl[..., None] - (total - left) / nr[..., None]).sum(axis=2)
    gain = (nl / n) * (nr / n) / 4.0 * diff * diff          # (n-1, p)
    valid = zs[:-1] < zs[1:]
    if not valid.any():
        return None
    gain = np.where(valid, gain, -1.0).T                     # axis-major
    flat = int(np.argmax(gain))
    axis, pos = divmod(flat, n - 1)
    thr = _midpoint(zs[pos, axis], zs[pos + 1, axis])
    return float(gain[axis, pos]), axis, thr


def best_axis_parallel(node: NodeData) -> CandidateSplit:
    """Exhaustive axis-parallel search in the node's own coordinates."""
    res = _sweep(node.X, node.y, node.n_classes)
    if res is None:
        raise NoValidSplit("every feature is constant within the node")
    gain, axis, thr = res
    if gain <= 0.0:
        raise NoValidSplit("no cut reduces impurity")
    w = np.zeros(node.p)
    w[axis] = 1.0
    return CandidateSplit(w, thr, gain, AXIS_PARALLEL, axis)


def _informative(X: np.ndarray) -> bool:
    return X.shape[0] >= 2 and not np.all(X == X[0])


def candidate_bases(node: NodeData, params: SplitterParams) -> Iterator[tuple[tuple, np.ndarray]]:
    """Yield ``((origin, class_index, eigen_index), basis)`` in evaluation order.

    The first basis is always the identity (plain axis-parallel cuts). Each
    further basis is a Householder matrix whose columns are the candidate
    split normals. Eigenvectors within ``tau`` of a coordinate axis yield
    nothing new, since the identity basis already covers them.
    """
    yield (AXIS_PARALLEL, -1, -1), np.eye(node.p)
    if params.variant == "AP" or node.n <= params.min_oblique_n * node.p:
        return
    for c in node.class_set:
        Xc = node.X[node.y == c]
        if not _informative(Xc):
            continue
        cov = linalg.covariance(Xc)
        try:
            if params.variant == "A":
                pairs = linalg.nonzero_eigen(linalg.symmetric_eigen(cov))
            else:
                top = linalg.dominant_eigen(cov)
                pairs = linalg.nonzero_eigen([top])
        except (ConvergenceFailure, DegenerateClass):
            continue
        for j, pair in pairs:
            if linalg.near_axis(pair.vector, params.tau):
                continue
            yield (REFLECTION, c, j), linalg.householder(pair.vector).H


def find_best_split(node: NodeData, params: SplitterParams | None = None) -> CandidateSplit:
    """Highest-gain split over all candidate bases.

    A later candidate replaces the incumbent only on strictly larger gain, so
    ties favour axis-parallel splits, then lower class and eigen indices.
    """
    params = params or SplitterParams()
    best = None
    for (origin, c, j), H in candidate_bases(node, params):
        Z = node.X if origin == AXIS_PARALLEL else linalg.reflect(node.X, H)
        res = _sweep(Z, node.y, node.n_classes)
        if res is None:
            continue
        gain, axis, thr = res
        if best is None or gain > best.gain:
            best = CandidateSplit(H[:, axis].copy(), thr, gain, origin, axis, c, j)
    if best is None:
        raise NoValidSplit("every feature is constant within the node")
    if best.gain <= 0.0:
        raise NoValidSplit("no cut reduces impurity")
    return best


def partition(X, split: CandidateSplit) -> np.ndarray:
    """Boolean mask of rows sent left (``w . x <= c``)."""
    return linalg.project(X, split.weights) <= split.threshold
