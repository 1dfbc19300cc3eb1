"""Sub-vectors, children, semantic trees.

A vector ``delta`` is a sub-vector of ``v`` when ``delta . v >= |delta|^2``;
the children of ``delta`` are all vocabulary vectors it is a sub-vector of.
A semantic tree over support vectors ``S`` has root ``alpha`` (the smallest
projection of the supports onto the direction of their sum) and one branch
``v_i - alpha`` per support.

All dot products that feed the predicate go through :func:`dot_rows`, which
sums each row with numpy's pairwise reduction.  The result for a row does not
depend on which other rows are in the batch, so checking a support set and
scanning the whole vocabulary give bit-identical margins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embed_io import EmbeddingSpace, as_vector
from .errors import (
    ArityMismatch,
    DegenerateSupportSet,
    DimensionMismatch,
    IndexOutOfRange,
    ScaleOutOfRange,
    ZeroDelta,
    ZeroSum,
)

_CHUNK = 4096
_EPS = np.finfo(np.float64).eps


def dot_rows(matrix: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise ``matrix[i] . v`` with a batch-independent summation order."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[0] <= _CHUNK:
        return (matrix * v).sum(axis=1)
    out = np.empty(matrix.shape[0])
    for s in range(0, matrix.shape[0], _CHUNK):
        out[s:s + _CHUNK] = (matrix[s:s + _CHUNK] * v).sum(axis=1)
    return out


def sqnorm(v: np.ndarray) -> float:
    return float((v * v).sum())


def margins(matrix: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """``delta . v - |delta|^2`` for every row ``v``; >= 0 means sub-vector."""
    return dot_rows(matrix, delta) - sqnorm(delta)


def is_subvector(delta, v) -> bool:
    delta = as_vector(delta)
    v = as_vector(v, delta.shape[0])
    return bool(margins(v[None, :], delta)[0] >= 0.0)


@dataclass(frozen=True)
class SubVectorReport:
    delta: np.ndarray
    children: list  # [(token, margin)], margin-descending, ties by token

    @property
    def count(self) -> int:
        return len(self.children)

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.children]


def children(space: EmbeddingSpace, delta) -> SubVectorReport:
    """All vocabulary words having ``delta`` as a sub-vector, ranked by margin."""
    delta = as_vector(delta, space.dim)
    if not np.any(delta):
        raise ZeroDelta("the zero vector is a sub-vector of every word")
    m = margins(space.matrix, delta)
    idx = np.flatnonzero(m >= 0.0)
    order = idx[np.lexsort((space.lex_rank[idx], -m[idx]))]
    return SubVectorReport(delta, [(space.words[i], float(m[i])) for i in order])


def _stack(vectors) -> np.ndarray:
    try:
        S = np.array([np.asarray(v, dtype=np.float64) for v in vectors], dtype=np.float64)
    except ValueError:
        raise DimensionMismatch("support vectors differ in length") from None
    if S.ndim != 2 or S.shape[0] == 0:
        if S.ndim == 1 and S.shape[0] == 0:
            raise ArityMismatch("need at least one support vector")
        raise DimensionMismatch(f"support vectors must form a 2-D array, got {S.shape}")
    return S


def _tree_holds(S: np.ndarray, alpha: np.ndarray) -> bool:
    if (margins(S, alpha) < 0).any():
        return False
    B = S - alpha
    return bool(((S * B).sum(axis=1) >= (B * B).sum(axis=1)).all())


def _root_parts(S: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    if (S == S[0]).all():
        # one distinct support: the root is that vector itself, bit for bit
        norm = np.sqrt(sqnorm(S[0]))
        if norm == 0.0:
            raise ZeroSum("support vectors sum to zero")
        return S[0].copy(), S[0] / norm, float(norm)
    total = S.sum(axis=0)
    norm = np.sqrt(sqnorm(total))
    if norm == 0.0:
        raise ZeroSum("support vectors sum to zero")
    unit = total / norm
    v_min = float(dot_rows(S, unit).min())
    if not v_min > 0.0:
        raise DegenerateSupportSet(f"smallest projection is {v_min:.6g}")
    # The tightest support meets the predicate with equality, so rounding can
    # put it (or its branch) a few ulps outside; shrink v_min until it holds.
    shrink = 0.0
    for _ in range(64):
        v = v_min * (1.0 - shrink)
        alpha = v * unit
        if _tree_holds(S, alpha):
            return alpha, unit, v
        shrink = _EPS if shrink == 0.0 else 2.0 * shrink
    raise DegenerateSupportSet("cannot place the root inside every support")


def root(vectors: Sequence) -> np.ndarray:
    """``v_min * unit(sum(S))`` with ``v_min`` the smallest projection onto that unit."""
    return _root_parts(_stack(vectors))[0]


@dataclass(frozen=True, eq=False)
class SemanticTree:
    tokens: tuple[str, ...]
    vectors: np.ndarray  # (n, dim) supports
    alpha: np.ndarray
    alpha_unit: np.ndarray
    v_min: float
    branches: np.ndarray  # (n, dim), branches[i] = vectors[i] - alpha

    @property
    def support(self) -> list[tuple[str, np.ndarray]]:
        return list(zip(self.tokens, self.vectors))

    def __len__(self):
        return len(self.tokens)

    def position(self, key) -> int:
        if isinstance(key, str):
            try:
                return self.tokens.index(key)
            except ValueError:
                raise IndexOutOfRange(f"{key!r} is not a support of this tree") from None
        if not -len(self.tokens) <= key < len(self.tokens):
            raise IndexOutOfRange(f"support index {key} out of range")
        return key % len(self.tokens)

    def branch(self, key) -> np.ndarray:
        return self.branches[self.position(key)]

    def offset(self, i, j) -> np.ndarray:
        """``v_j - v_i``, the classic analogy offset between two supports."""
        return self.vectors[self.position(j)] - self.vectors[self.position(i)]


def build_tree(named_support: Sequence[tuple[str, object]]) -> SemanticTree:
    if len(named_support) < 2:
        raise ArityMismatch("a semantic tree needs at least two supports")
    tokens = tuple(str(t) for t, _ in named_support)
    S = _stack([v for _, v in named_support])
    alpha, unit, v_min = _root_parts(S)
    for a in (S, alpha, unit):
        a.setflags(write=False)
    branches = S - alpha
    branches.setflags(write=False)
    return SemanticTree(tokens, S, alpha, unit, v_min, branches)


def tree_from_words(space: EmbeddingSpace, words: Sequence[str]) -> SemanticTree:
    return build_tree([(space.resolve(w), space.vector(w)) for w in words])


def orthogonal_branch(tree: SemanticTree, i) -> np.ndarray:
    """Branch ``i`` with its component along the root removed."""
    b = tree.branch(i)
    u = tree.alpha_unit
    perp = b - float((b * u).sum()) * u
    # second pass mops up the cancellation error of the first
    return perp - float((perp * u).sum()) * u


def residual(v, vectors: Sequence) -> np.ndarray:
    """``v - root(S)``: what is left of ``v`` once the shared root is removed."""
    S = _stack(vectors)
    v = as_vector(v, S.shape[1])
    return v - _root_parts(S)[0]


def scale_split(v, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Split ``v`` into ``(c v, (1 - c) v)`` whose sum is exactly ``v``."""
    if not 0.0 <= c <= 1.0:
        raise ScaleOutOfRange(f"scale {c} outside [0, 1]")
    v = as_vector(v)
    # the larger part is rounded, the smaller one is an exact difference
    if c >= 0.5:
        first = c * v
        return first, v - first
    second = (1.0 - c) * v
    return v - second, second
