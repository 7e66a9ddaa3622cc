"""Minimum 1-trees and the Held-Karp subgradient ascent over node penalties."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

logger = logging.getLogger(__name__)

FORCED_WEIGHT = 0.5
FREE_OFFSET = 1.0


@dataclass(frozen=True)
class OneTree:
    """Spanning tree on nodes ``1..n-1`` plus two edges at node 0."""

    value: float
    edges: np.ndarray
    degrees: np.ndarray

    def is_tour(self) -> bool:
        return bool(np.all(self.degrees == 2))


def min_one_tree(weights: np.ndarray, allowed: Optional[np.ndarray] = None,
                 forced: Optional[np.ndarray] = None) -> Optional[OneTree]:
    """Cheapest 1-tree using every forced edge and no disallowed one.

    Args:
        weights: Symmetric ``n x n`` edge weights (may be negative)
        allowed: Boolean mask of usable edges, all edges when omitted
        forced: Boolean mask of edges that must be in the 1-tree

    Returns:
        The 1-tree, or None when the restrictions admit none
    """
    n = weights.shape[0]
    off_diagonal = ~np.eye(n, dtype=bool)
    allowed = off_diagonal if allowed is None else (allowed & off_diagonal)
    forced = np.zeros((n, n), dtype=bool) if forced is None else (forced & off_diagonal)

    # node 0 takes its two cheapest usable edges, forced ones first
    at_zero = np.flatnonzero(allowed[0])
    forced_zero = np.flatnonzero(forced[0])
    if forced_zero.size > 2 or at_zero.size < 2:
        return None
    free_zero = np.setdiff1d(at_zero, forced_zero)
    free_zero = free_zero[np.argsort(weights[0, free_zero], kind="stable")]
    zero_ends = np.concatenate([forced_zero, free_zero])[:2]

    # forced edges weigh less than every free edge, so Kruskal takes them all
    # unless they close a cycle; 0 marks a missing edge for csgraph
    sub_w = weights[1:, 1:]
    sub_allowed = np.triu(allowed[1:, 1:], 1)
    sub_forced = np.triu(forced[1:, 1:], 1)
    tiers = np.zeros((n - 1, n - 1))
    free = sub_allowed & ~sub_forced
    if free.any():
        tiers[free] = sub_w[free] - sub_w[free].min() + FREE_OFFSET
    tiers[sub_forced] = FORCED_WEIGHT
    tree = minimum_spanning_tree(tiers).tocoo()
    if tree.nnz != n - 2:
        return None
    rows, cols = tree.row + 1, tree.col + 1
    if sub_forced.any():
        chosen = np.zeros((n, n), dtype=bool)
        chosen[rows, cols] = True
        chosen |= chosen.T
        if not np.all(chosen[1:, 1:][sub_forced]):
            return None

    edges = np.vstack([
        np.column_stack([np.zeros(2, dtype=np.int64), zero_ends]),
        np.column_stack([np.minimum(rows, cols), np.maximum(rows, cols)]),
    ]).astype(np.int64)
    degrees = np.bincount(edges.ravel(), minlength=n)
    value = float(weights[edges[:, 0], edges[:, 1]].sum())
    return OneTree(value, edges, degrees)


def penalized(matrix: np.ndarray, penalties: np.ndarray) -> np.ndarray:
    return matrix.astype(float) + penalties[:, None] + penalties[None, :]


def one_tree_value(matrix: np.ndarray, penalties: np.ndarray, allowed: Optional[np.ndarray] = None,
                   forced: Optional[np.ndarray] = None) -> Tuple[Optional[float], Optional[OneTree]]:
    """Lagrangian bound ``1-tree(c + pi_i + pi_j) - 2 sum(pi)``, None if no 1-tree exists."""
    tree = min_one_tree(penalized(matrix, penalties), allowed, forced)
    if tree is None:
        return None, None
    return tree.value - 2.0 * float(penalties.sum()), tree


def subgradient_ascent(matrix: np.ndarray, iterations: int, upper_bound: float,
                       penalties: Optional[np.ndarray] = None, allowed: Optional[np.ndarray] = None,
                       forced: Optional[np.ndarray] = None, step_scale: float = 2.0
                       ) -> Tuple[Optional[float], np.ndarray, Optional[OneTree]]:
    """Held-Karp ascent with step ``scale * (UB - L) / ||d - 2||^2``.

    The scale halves whenever an iteration fails to raise the best bound.

    Returns:
        ``(best bound, penalties at the best bound, 1-tree at the best bound)``;
        the bound is None if no 1-tree exists
    """
    n = matrix.shape[0]
    pi = np.zeros(n) if penalties is None else np.array(penalties, dtype=float)
    best_bound, best_tree = one_tree_value(matrix, pi, allowed, forced)
    if best_bound is None:
        return None, pi, None
    best_pi = pi.copy()
    bound, tree = best_bound, best_tree

    for it in range(iterations):
        if tree.is_tour() or best_bound >= upper_bound:
            break
        g = tree.degrees - 2.0
        norm = float(g @ g)
        gap = upper_bound - bound
        if norm == 0.0 or not np.isfinite(gap) or gap <= 0:
            break
        pi = pi + step_scale * gap / norm * g
        bound, tree = one_tree_value(matrix, pi, allowed, forced)
        if bound is None:
            break
        if bound > best_bound:
            best_bound, best_pi, best_tree = bound, pi.copy(), tree
        else:
            step_scale /= 2.0
        logger.debug("subgradient it=%d bound=%.9g best=%.9g step=%.3g", it, bound, best_bound, step_scale)

    return best_bound, best_pi, best_tree
