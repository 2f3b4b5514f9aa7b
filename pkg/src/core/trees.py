"""Rooted planar trees, Dyck words and the tree combination used by the moment formulas.

A tree with k edges is stored as a parent array of length k+1 in depth-first order:
vertex 0 is the root (parent -1), parent[v] < v, and the children of a vertex are
ordered by index. Dyck words are strings over ``U``/``D``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb
from typing import Iterator

from src.config import get_settings
from src.errors import MalformedWordError, SizeCapError, ValidationError

log = logging.getLogger(__name__)

UP = "U"
DOWN = "D"


@dataclass(frozen=True)
class RootedPlanarTree:
    parent: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.parent
        if not p or p[0] != -1:
            raise ValidationError("parent array must start with -1 for the root")
        # contiguous subtrees in DFS order <=> each parent is on the current root path
        path = [0]
        for v in range(1, len(p)):
            if not 0 <= p[v] < v:
                raise ValidationError(f"parent[{v}]={p[v]} must lie in [0, {v})")
            while path[-1] != p[v]:
                path.pop()
                if not path:
                    raise ValidationError(f"vertex {v} breaks depth-first numbering")
            path.append(v)

    @property
    def edges(self) -> int:
        return len(self.parent) - 1

    @property
    def vertices(self) -> int:
        return len(self.parent)

    def children(self, v: int) -> list[int]:
        return [u for u in range(v + 1, len(self.parent)) if self.parent[u] == v]

    @classmethod
    def single_vertex(cls) -> "RootedPlanarTree":
        return cls((-1,))


@dataclass(frozen=True)
class StarredTree:
    """A tree plus one extra vertex (index ``base.vertices``) attached to the root.

    The extra vertex is the labeled endpoint; it is the only vertex adjacent to it.
    """

    base: RootedPlanarTree

    @property
    def labeled_vertex(self) -> int:
        return self.base.vertices

    @property
    def edges(self) -> int:
        return self.base.edges + 1

    def edge_list(self) -> list[tuple[int, int]]:
        out = [(self.base.parent[v], v) for v in range(1, self.base.vertices)]
        out.append((self.labeled_vertex, 0))
        return out


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def validate_dyck(word: str) -> None:
    height = 0
    for pos, step in enumerate(word):
        if step == UP:
            height += 1
        elif step == DOWN:
            height -= 1
        else:
            raise MalformedWordError(f"invalid step {step!r} at position {pos}")
        if height < 0:
            raise MalformedWordError(f"prefix of length {pos + 1} has more downs than ups")
    if height != 0:
        raise MalformedWordError(f"word is unbalanced by {height}")


def dyck_to_tree(word: str) -> RootedPlanarTree:
    validate_dyck(word)
    parent = [-1]
    # the stack is the path from the root to the current vertex
    stack = [0]
    for step in word:
        if step == UP:
            # a new child of the vertex on top of the stack
            v = len(parent)
            parent.append(stack[-1])
            stack.append(v)
        else:
            stack.pop()
    return RootedPlanarTree(tuple(parent))


def tree_to_dyck(tree: RootedPlanarTree) -> str:
    out: list[str] = []
    stack = [0]
    for v in range(1, tree.vertices):
        # climb back up to v's parent, one D per edge
        while stack[-1] != tree.parent[v]:
            stack.pop()
            out.append(DOWN)
        out.append(UP)
        stack.append(v)
    # return to the root
    out.extend(DOWN * (len(stack) - 1))
    return "".join(out)


def iter_dyck_words(k: int) -> Iterator[str]:
    # lexicographic with U < D: try an up-step before a down-step at every position
    def extend(prefix: list[str], ups: int, downs: int) -> Iterator[str]:
        if ups == k and downs == k:
            yield "".join(prefix)
            return
        if ups < k:
            prefix.append(UP)
            yield from extend(prefix, ups + 1, downs)
            prefix.pop()
        if downs < ups:
            prefix.append(DOWN)
            yield from extend(prefix, ups, downs + 1)
            prefix.pop()

    yield from extend([], 0, 0)


def iter_trees(k: int) -> Iterator[RootedPlanarTree]:
    """Stream all trees with k edges without materializing the list (no cap)."""
    if k < 0:
        raise ValidationError(f"k must be non-negative, got {k}")
    for word in iter_dyck_words(k):
        yield dyck_to_tree(word)


def enumerate_trees(k: int, cap: int | None = None) -> list[RootedPlanarTree]:
    cap = get_settings().tree_cap if cap is None else cap
    if k < 0:
        raise ValidationError(f"k must be non-negative, got {k}")
    if k > cap:
        raise SizeCapError("tree size k", k, cap)
    trees = list(iter_trees(k))
    log.debug("enumerated %d trees with %d edges", len(trees), k)
    return trees


def attach_root_edge(tree: RootedPlanarTree) -> StarredTree:
    return StarredTree(tree)


def combine(left: RootedPlanarTree, starred: StarredTree) -> RootedPlanarTree:
    """Identify the labeled vertex of ``starred`` with the root of ``left``.

    The base of ``starred`` becomes the last child subtree of the root, so the vertices
    of ``left`` keep indices 0..k and the base takes k+1..k+l+1, both in DFS order.
    """
    offset = left.vertices
    # the base root hangs off the root of left; its descendants shift by offset
    grafted = [0] + [p + offset for p in starred.base.parent[1:]]
    return RootedPlanarTree(left.parent + tuple(grafted))
