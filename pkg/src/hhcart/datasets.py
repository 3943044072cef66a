"""Bundled benchmark tables.

breast_cancer
    Wisconsin breast cancer (original, 699 biopsies), complete cases only:
    683 rows, 9 integer-scored features, benign/malignant.
wine
    178 wines, 13 chemical measurements, 3 cultivars.
balance_scale
    All 625 (left weight, left distance, right weight, right distance)
    combinations on 1..5, labelled L, B or R by comparing torques.
"""

from __future__ import annotations

from importlib import resources

from .core import Dataset, load_csv, read_schema

BUILTIN = ("breast_cancer", "wine", "balance_scale")


def builtin_paths(name: str):
    """(csv path, schema path) of a bundled dataset."""
    if name not in BUILTIN:
        raise KeyError(f"unknown dataset {name!r}; choose from {BUILTIN}")
    root = resources.files("hhcart") / "data"
    return root / f"{name}.csv", root / f"{name}.schema"


def load_builtin(name: str) -> Dataset:
    csv_path, schema_path = builtin_paths(name)
    with resources.as_file(csv_path) as c, resources.as_file(schema_path) as s:
        return load_csv(c, read_schema(s))
