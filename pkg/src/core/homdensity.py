"""Tree homomorphism densities into step graphons and the moment formulas built from them.

Densities are computed exactly by passing messages from the leaves to the root: the
message of a vertex sitting in block i is the product over its children c of
sum_j weights[i, j] * fractions[j] * message(c at j).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from src.config import get_settings
from src.core.graphon import AnalyticGraphon, Graphon, StepGraphon, bipartite_blocks
from src.core.trees import RootedPlanarTree, StarredTree, catalan, iter_trees
from src.errors import SizeCapError, ValidationError

log = logging.getLogger(__name__)

MomentSource = Literal["tree-density", "empirical", "qve-series", "qve-transform", "gram-tree-density"]


@dataclass(frozen=True)
class MomentTable:
    entries: dict[int, float]
    source: MomentSource
    max_order: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if set(self.entries) != set(range(self.max_order + 1)):
            raise ValidationError(f"moment table must hold orders 0..{self.max_order}")
        if not all(np.isfinite(v) for v in self.entries.values()):
            raise ValidationError("moments must be finite")
        if self.source in ("tree-density", "qve-series"):
            if self.entries[0] != 1.0 or any(self.entries[k] != 0.0 for k in range(1, self.max_order + 1, 2)):
                raise ValidationError("predicted tables need beta_0 = 1 and vanishing odd moments")

    def __getitem__(self, order: int) -> float:
        return self.entries[order]

    def even(self) -> dict[int, float]:
        return {k: v for k, v in self.entries.items() if k % 2 == 0}

    def to_rows(self) -> list[dict]:
        return [{"order": k, "value": v, "source": self.source} for k, v in sorted(self.entries.items())]


@dataclass(frozen=True)
class RootedMomentVector:
    order: int
    values: np.ndarray

    def average(self, W: StepGraphon) -> float:
        return float(W.fractions @ self.values)


def _messages(tree: RootedPlanarTree, op: np.ndarray) -> np.ndarray:
    # leaves start at 1 in every block
    msg = np.ones((tree.vertices, op.shape[0]))
    # DFS order puts every child after its parent, so a reverse sweep finishes each
    # subtree before its message is folded into the parent
    for v in range(tree.vertices - 1, 0, -1):
        msg[tree.parent[v]] *= op @ msg[v]
    return msg


def rooted_tree_density(tree: RootedPlanarTree, W: StepGraphon) -> np.ndarray:
    """Entry i is t_x(T, W) with the root pinned to a point x of block i."""
    return _messages(tree, W.operator)[0]


def tree_density(tree: RootedPlanarTree, W: StepGraphon) -> float:
    return float(W.fractions @ rooted_tree_density(tree, W))


def starred_density(starred: StarredTree, W: StepGraphon) -> np.ndarray:
    """Density with the extra (labeled) vertex pinned; the base root is integrated out."""
    return W.operator @ rooted_tree_density(starred.base, W)


def _trees(k: int, stream: bool) -> Iterable[RootedPlanarTree]:
    cap = get_settings().tree_cap
    if k < 0:
        raise ValidationError(f"moment half-order must be non-negative, got {k}")
    if k > cap and not stream:
        raise SizeCapError("moment half-order k", k, cap)
    return iter_trees(k)


def wigner_moment(k: int, W: StepGraphon, stream: bool = False) -> float:
    """Limit of the 2k-th moment: sum over all C_k rooted planar trees with k edges.

    Terms are summed in enumeration order so the result is deterministic.
    """
    total = 0.0
    for tree in _trees(k, stream):
        total += tree_density(tree, W)
    return total


def rooted_moment_vector(k: int, W: StepGraphon, stream: bool = False) -> RootedMomentVector:
    values = np.zeros(W.d)
    for tree in _trees(k, stream):
        values += rooted_tree_density(tree, W)
    return RootedMomentVector(k, values)


def moment_table(W: StepGraphon, max_order: int) -> MomentTable:
    entries = {0: 1.0}
    for order in range(1, max_order + 1):
        entries[order] = wigner_moment(order // 2, W) if order % 2 == 0 else 0.0
    return MomentTable(entries, "tree-density", max_order, {"d": W.d})


def moment_bound(k: int, W: StepGraphon) -> float:
    return catalan(k) * W.sup_norm**k


def gram_moment(k: int, W: StepGraphon, y: float, stream: bool = False) -> float:
    """k-th moment of the Gram limit from the symmetrized graphon W at aspect ratio y."""
    bipartite_blocks(W, y)
    if k < 1:
        raise ValidationError(f"Gram moment order must be positive, got {k}")
    total = 0.0
    for tree in _trees(k, stream):
        total += tree_density(tree, W)
    # tr(H^2k) of the symmetrization over 2mn^k, rescaled from the (m+n) normalization
    return (1.0 + y) ** (k + 1) / (2.0 * y) * total


def gram_moment_table(W: StepGraphon, y: float, max_order: int) -> MomentTable:
    entries = {0: 1.0}
    for k in range(1, max_order + 1):
        entries[k] = gram_moment(k, W, y)
    return MomentTable(entries, "gram-tree-density", max_order, {"d": W.d, "aspect": y})


# Monte Carlo ----------------------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int


def _kernel_values(W: Graphon, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if isinstance(W, AnalyticGraphon):
        return W(x, y)
    return W.weights[W.block_of(x), W.block_of(y)]


def mc_tree_density(tree: RootedPlanarTree, W: Graphon, samples: int, seed: int) -> McEstimate:
    """Sample mean of prod W(x_u, x_v) over i.i.d. uniform vertex coordinates.

    Philox is counter-based, so (seed, samples) fixes the output on every platform.
    """
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    # one row of vertex coordinates per sample
    x = rng.random((samples, tree.vertices))
    values = np.ones(samples)
    for v in range(1, tree.vertices):
        values *= _kernel_values(W, x[:, v], x[:, tree.parent[v]])
    stderr = float(values.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return McEstimate(float(values.mean()), stderr, samples, seed)
