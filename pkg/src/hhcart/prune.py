"""Weakest-link cost-complexity pruning and holdout subtree selection."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Dataset
from .tree import Tree, TreeNode, copy_tree


@dataclass
class PruneSequence:
    subtrees: list[Tree]
    alphas: list[Fraction]
    full: Tree

    def __len__(self):
        return len(self.subtrees)

    def __iter__(self):
        return iter(zip(self.subtrees, self.alphas))

    @property
    def sizes(self) -> list[int]:
        return [t.size for t in self.subtrees]


@dataclass
class Selection:
    tree: Tree
    index: int
    errors: list[int]
    flagged: bool = False


def _links(root: TreeNode, collapsed: set) -> dict[int, Fraction]:
    """Link strength g(t) of every live internal node, keyed by node id."""
    out: dict[int, Fraction] = {}

    def visit(nd: TreeNode) -> tuple[int, int]:
        # returns (leaf error count, leaf count) of the live subtree
        if nd.is_leaf or nd.id in collapsed:
            return nd.misclassified, 1
        el, ll = visit(nd.left)
        er, lr = visit(nd.right)
        err, leaves = el + er, ll + lr
        out[nd.id] = Fraction(nd.misclassified - err, leaves - 1)
        return err, leaves

    visit(root)
    return out


def prune_sequence(tree: Tree) -> PruneSequence:
    """Nested subtrees from weakest-link pruning, with their alpha values.

    Node error counts come from the training histograms stored in the tree.
    Links with zero strength are removed before the first entry, which is
    therefore the smallest subtree with the full tree's training error
    (identical to the full tree unless some split does not lower it).
    Every later step collapses all nodes attaining the minimum strength.
    """
    collapsed: set[int] = set()
    while True:
        g = _links(tree.root, collapsed)
        zero = {i for i, v in g.items() if v <= 0}
        if not zero:
            break
        collapsed |= zero
    subtrees = [copy_tree(tree, frozenset(collapsed))]
    alphas = [Fraction(0)]
    while True:
        g = _links(tree.root, collapsed)
        if not g:
            break
        alpha = min(g.values())
        collapsed |= {i for i, v in g.items() if v == alpha}
        subtrees.append(copy_tree(tree, frozenset(collapsed)))
        alphas.append(alpha)
    return PruneSequence(subtrees, alphas, tree)


def select_subtree(seq: PruneSequence, prune_set: Dataset | None) -> Selection:
    """Minimum prune-set error subtree; ties go to the smallest tree.

    An empty or missing prune set returns the unpruned tree, flagged.
    """
    if prune_set is None or prune_set.n == 0:
        return Selection(seq.full, -1, [], flagged=True)
    errors = [t.errors(prune_set) for t in seq.subtrees]
    best = min(errors)
    # later entries are smaller trees
    index = max(i for i, e in enumerate(errors) if e == best)
    return Selection(seq.subtrees[index], index, errors)


def prune(tree: Tree, prune_set: Dataset | None) -> Tree:
    return select_subtree(prune_sequence(tree), prune_set).tree


def pruned_ids(full: Tree, sub: Tree) -> set[int]:
    """Ids of internal nodes of ``full`` that are leaves in ``sub``."""
    sub_leaves = {nd.id for nd in sub.root.walk() if nd.is_leaf}
    return {nd.id for nd in full.root.walk() if not nd.is_leaf and nd.id in sub_leaves}

