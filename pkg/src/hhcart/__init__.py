"""Oblique decision trees grown from Householder-reflected axis-parallel splits."""

from .core import (ClassDictionary, DataPartition, Dataset, Feature, FeatureSchema,
                   load_csv, parse_schema, read_schema, split_holdout, write_csv)
from .crimcoord import CrimcoordMap, apply_crimcoords, fit_crimcoord
from .evaluation import EvalConfig, EvalReport, cross_validate, scaling_probe, train_test
from .prune import PruneSequence, prune, prune_sequence, select_subtree
from .splitter import (CandidateSplit, NodeData, SplitterParams, best_axis_parallel,
                       find_best_split, twoing_gain)
from .tree import GrowParams, Split, Tree, TreeNode, grow, load, predict, save, tree_size

__version__ = "0.1.0"
