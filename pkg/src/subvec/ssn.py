"""Semantic space networks: semantic trees whose roots feed further trees.

Three shapes are provided.  Branch names follow support order inside each
tree, e.g. in the binary tree ``gamma1 = v1 - b`` and ``gamma4 = v4 - c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decomp import SemanticTree, build_tree, children, margins
from .embed_io import EmbeddingSpace
from .errors import ArityMismatch, DegenerateSupportSet


def _tree(name: str, support) -> SemanticTree:
    try:
        return build_tree(support)
    except DegenerateSupportSet as exc:
        raise DegenerateSupportSet(str(exc), tree=name) from None


def _words(space: EmbeddingSpace, words: Sequence[str], n: int, shape: str):
    if len(words) != n:
        raise ArityMismatch(f"{shape} needs exactly {n} words, got {len(words)}")
    return [(space.resolve(w), space.vector(w)) for w in words]


@dataclass(frozen=True, eq=False)
class BinaryTreeSsn:
    lower_left: SemanticTree   # (v1, v2) -> root b
    lower_right: SemanticTree  # (v3, v4) -> root c
    top: SemanticTree          # (b, c) -> root alpha

    shape = "binary"

    @property
    def words(self) -> tuple[str, ...]:
        return self.lower_left.tokens + self.lower_right.tokens

    def nodes(self) -> dict[str, np.ndarray]:
        ll, lr, top = self.lower_left, self.lower_right, self.top
        return {
            "alpha": top.alpha,
            "b": ll.alpha,
            "c": lr.alpha,
            "beta1": top.branches[0],
            "beta2": top.branches[1],
            "gamma1": ll.branches[0],
            "gamma2": ll.branches[1],
            "gamma3": lr.branches[0],
            "gamma4": lr.branches[1],
        }


def binary_tree(space: EmbeddingSpace, words: Sequence[str]) -> BinaryTreeSsn:
    v = _words(space, words, 4, "binary tree")
    left = _tree("lower_left", v[:2])
    right = _tree("lower_right", v[2:])
    top = _tree("top", [("b", left.alpha), ("c", right.alpha)])
    return BinaryTreeSsn(left, right, top)


@dataclass(frozen=True, eq=False)
class TernaryTreeSsn:
    left: SemanticTree   # (v1, v2) -> root b
    right: SemanticTree  # (v2, v3) -> root c
    top: SemanticTree    # (b, c) -> root alpha

    shape = "ternary"

    @property
    def words(self) -> tuple[str, ...]:
        return self.left.tokens + self.right.tokens[1:]

    def nodes(self) -> dict[str, np.ndarray]:
        return {
            "alpha": self.top.alpha,
            "b": self.left.alpha,
            "c": self.right.alpha,
            "beta1": self.top.branches[0],
            "beta2": self.top.branches[1],
            "gamma1": self.left.branches[0],
            "gamma2": self.left.branches[1],
            "gamma3": self.right.branches[0],
            "gamma4": self.right.branches[1],
        }


def ternary_tree(space: EmbeddingSpace, words: Sequence[str]) -> TernaryTreeSsn:
    v = _words(space, words, 3, "ternary tree")
    left = _tree("left", v[:2])
    right = _tree("right", v[1:])
    top = _tree("top", [("b", left.alpha), ("c", right.alpha)])
    return TernaryTreeSsn(left, right, top)


@dataclass(frozen=True, eq=False)
class QuadRelationSsn:
    trees: tuple[SemanticTree, SemanticTree, SemanticTree, SemanticTree]

    shape = "quad"

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t.tokens[0] for t in self.trees)

    def nodes(self) -> dict[str, np.ndarray]:
        out = {f"alpha{i + 1}": t.alpha for i, t in enumerate(self.trees)}
        for i, t in enumerate(self.trees):
            out[f"beta{2 * i + 1}"] = t.branches[0]
            out[f"beta{2 * i + 2}"] = t.branches[1]
        return out


def quad_relation(space: EmbeddingSpace, words: Sequence[str]) -> QuadRelationSsn:
    """Ring of four trees over (v1,v2), (v2,v3), (v3,v4), (v4,v1)."""
    v = _words(space, words, 4, "quadruple relation")
    trees = tuple(_tree(f"tree{i + 1}", [v[i], v[(i + 1) % 4]]) for i in range(4))
    return QuadRelationSsn(trees)


@dataclass(frozen=True, eq=False)
class SingleTreeSsn:
    """A lone semantic tree exposed through the same reporting interface."""

    tree: SemanticTree

    shape = "tree"

    @property
    def words(self) -> tuple[str, ...]:
        return self.tree.tokens

    def nodes(self) -> dict[str, np.ndarray]:
        out = {"alpha": self.tree.alpha}
        for tok, b in zip(self.tree.tokens, self.tree.branches):
            out[f"beta[{tok}]"] = b
        return out


def single_tree(space: EmbeddingSpace, words: Sequence[str]) -> SingleTreeSsn:
    if len(words) < 2:
        raise ArityMismatch(f"a tree needs at least 2 words, got {len(words)}")
    return SingleTreeSsn(_tree("tree", [(space.resolve(w), space.vector(w)) for w in words]))


SHAPES = {
    "tree": single_tree,
    "binary": binary_tree,
    "ternary": ternary_tree,
    "quad": quad_relation,
}


def build_ssn(space: EmbeddingSpace, shape: str, words: Sequence[str]):
    try:
        factory = SHAPES[shape]
    except KeyError:
        raise ArityMismatch(f"unknown shape {shape!r}; choose from {sorted(SHAPES)}") from None
    return factory(space, words)


def describe(ssn, space: EmbeddingSpace, k_cap: int = 10) -> dict:
    """Norm, children count and the top ``k_cap`` children of every node.

    Zero nodes (e.g. branches of a tree over repeated words) have every word as
    a child; they are flagged ``degenerate`` and listed without children.
    """
    if k_cap < 0:
        raise ValueError("k_cap must be >= 0")
    report = {}
    for name, vec in ssn.nodes().items():
        norm = float(np.sqrt((vec * vec).sum()))
        entry = {"norm": norm}
        if not np.any(vec):
            entry.update(count=None, degenerate=True, children=[])
        else:
            rep = children(space, vec)
            entry.update(count=rep.count, children=[
                {"word": w, "margin": m} for w, m in rep.children[:k_cap]
            ])
        report[name] = entry
    return {"shape": ssn.shape, "words": list(ssn.words), "nodes": report}


def hierarchy_holds(ssn) -> dict[str, bool]:
    """Literal sub-vector identities between stacked trees (binary/ternary)."""
    if not isinstance(ssn, (BinaryTreeSsn, TernaryTreeSsn)):
        raise TypeError("hierarchy checks apply to binary and ternary trees")
    lower = (ssn.lower_left, ssn.lower_right) if isinstance(ssn, BinaryTreeSsn) else (ssn.left, ssn.right)
    top = ssn.top
    out = {}
    for name, parent in (("b", lower[0].alpha), ("c", lower[1].alpha)):
        out[f"alpha in subv({name})"] = bool(margins(parent[None, :], top.alpha)[0] >= 0)
    for name, t in zip(("b", "c"), lower):
        for tok, v in zip(t.tokens, t.vectors):
            out[f"{name} in subv({tok})"] = bool(margins(v[None, :], t.alpha)[0] >= 0)
    return out
