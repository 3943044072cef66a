"""Ordered numeric codes for qualitative features (CRIMCOORDs).

Each level of a qualitative feature gets the value of its largest
discriminant coordinate, computed from the class-labelled 0/1 level
indicators of the examples at a node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateClass

SVD_REL_CUTOFF = 1e-9


@dataclass(frozen=True)
class CrimcoordMap:
    feature: str
    column: int
    level_values: dict = field(default_factory=dict)
    fallback: float = 0.0

    def value(self, token) -> float:
        return self.level_values.get(str(token), self.fallback)

    def transform(self, tokens) -> np.ndarray:
        tokens = np.asarray(tokens, dtype=str)
        if tokens.size == 0:
            return np.empty(0)
        uniq, inv = np.unique(tokens, return_inverse=True)
        vals = np.array([self.value(u) for u in uniq], dtype=np.float64)
        return vals[inv.reshape(-1)]

    def to_dict(self) -> dict:
        return {"feature": self.feature, "column": self.column,
                "levels": [[k, self.level_values[k]] for k in sorted(self.level_values)],
                "fallback": self.fallback}

    @classmethod
    def from_dict(cls, d: dict) -> CrimcoordMap:
        return cls(d["feature"], int(d["column"]),
                   {str(k): float(v) for k, v in d["levels"]}, float(d["fallback"]))


def fit_crimcoord(levels, y, feature: str = "", column: int = 0) -> CrimcoordMap:
    """Fit the level -> CRIMCOORD map for one qualitative feature.

    The indicator matrix is centred, whitened through a thin SVD (dropping
    singular values at or below ``1e-9 * s_max``), and the dominant
    eigenvector of the between-class scatter of whitened class means gives the
    discriminant direction. A level's value is its centred indicator projected
    on that direction, scaled so the training projection has unit variance.
    The first level in sorted token order with a nonzero value is made
    positive. Unseen levels map to 0, the projection of the grand mean.
    """
    levels = np.asarray(levels, dtype=str)
    y = np.asarray(y, dtype=np.intp)
    if len(levels) != len(y):
        raise ValueError("levels and labels differ in length")
    tokens = sorted(set(levels.tolist()))
    zeros = CrimcoordMap(feature, column, {t: 0.0 for t in tokens})
    if len(tokens) < 2 or len(np.unique(y)) < 2 or len(y) < 2:
        return zeros

    # canonical row order: the result depends only on the (level, class) multiset
    order = np.lexsort((y, levels))
    levels, y = levels[order], y[order]
    n, m = len(y), len(tokens)
    code = np.searchsorted(np.array(tokens), levels)
    G = np.zeros((n, m))
    G[np.arange(n), code] = 1.0
    mu = G.mean(axis=0)
    Z = G - mu

    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    keep = s > SVD_REL_CUTOFF * s[0]
    U, s, Vt = U[:, keep], s[keep], Vt[keep]
    W = U * np.sqrt(n - 1)

    r = W.shape[1]
    B = np.zeros((r, r))
    for c in np.unique(y):
        mc = W[y == c].mean(axis=0)
        B += (y == c).sum() * np.outer(mc, mc)
    B = (B + B.T) / 2.0
    try:
        a = linalg.dominant_eigen(B).vector
    except DegenerateClass:
        return zeros

    direction = Vt.T @ (a * np.sqrt(n - 1) / s)
    values = (np.eye(m) - mu) @ direction
    scale = np.abs(values).max()
    if scale > 0:
        nz = np.flatnonzero(np.abs(values) > 1e-12 * scale)
        if values[nz[0]] < 0:
            values = -values
    values = values + 0.0  # no negative zeros in the map
    return CrimcoordMap(feature, column, {t: float(v) for t, v in zip(tokens, values)})


def apply_crimcoords(maps, row) -> np.ndarray:
    """Replace each mapped qualitative entry of ``row`` by its CRIMCOORD."""
    out = list(row)
    for mp in maps:
        out[mp.column] = mp.value(out[mp.column])
    return np.array(out, dtype=np.float64)


def fill_crimcoords(base: np.ndarray, tokens: dict, rows, maps) -> np.ndarray:
    """Effective quantitative matrix for ``rows``.

    ``base`` holds quantitative columns (qualitative columns are placeholders);
    ``tokens`` maps each qualitative column index to its level array.
    """
    E = base[rows].copy()
    for mp in maps:
        E[:, mp.column] = mp.transform(tokens[mp.column][rows])
    return E
