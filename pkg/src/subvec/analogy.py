"""Word analogy solvers and the Google-analogy benchmark.

Given ``x1 : y1 :: x2 : ?`` every method builds a target vector (or, for
``vec_of_mul``, a score) and answers with the best-scoring vocabulary word,
ties broken by token.  The offset methods exclude their input words; the
sub-vector methods exclude every word of ``X`` and ``Y``.

``ssn_branch``  target = (x2 - root(X)) + root(Y)
``ssn_filter``  target = root({x2 - root(x2, x_i) : x_i in X, x_i != x2}) + root(Y)
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpora import AnalogySections
from .decomp import root
from .embed_io import EmbeddingSpace
from .errors import DataError, DegenerateSupportSet, EmptyPairs, ZeroSum

logger = logging.getLogger(__name__)

METHODS = ("vec_of_add", "vec_of_mul", "vec_of_avr", "ssn_branch", "ssn_filter")
DISPLAY = {
    "vec_of_add": "VecOfAdd",
    "vec_of_mul": "VecOfMul",
    "vec_of_avr": "VecOfAvr",
    "ssn_branch": "SSNbranch",
    "ssn_filter": "SSNfilter",
}
EPSILON = 1e-3
_CHUNK = 64


# -- scoring --------------------------------------------------------------

def _cosines(space: EmbeddingSpace, targets: np.ndarray) -> np.ndarray:
    """(B, |V|) cosine matrix between target rows and the vocabulary."""
    n = np.linalg.norm(targets, axis=1, keepdims=True)
    unit = np.divide(targets, n, out=np.zeros_like(targets), where=n > 0)
    return unit @ space.unit_matrix.T


def _pick(space: EmbeddingSpace, scores: np.ndarray, banned: Iterable[int]) -> int:
    s = scores.copy()
    banned = list(banned)
    if banned:
        s[banned] = -np.inf
    best = s.max()
    if best == -np.inf:
        raise DataError("every vocabulary word is excluded")
    cand = np.flatnonzero(s == best)
    return int(cand[np.argmin(space.lex_rank[cand])])


def _argmax_targets(space, targets: np.ndarray, banned: Sequence) -> list[int]:
    scores = _cosines(space, np.atleast_2d(targets))
    return [_pick(space, scores[i], banned[i]) for i in range(scores.shape[0])]


def _mul_scores(space, i_x1, i_y1, i_x2, epsilon) -> np.ndarray:
    U = space.unit_matrix
    c = np.stack([U[i_y1], U[i_x2], U[i_x1]], axis=1) @ U.T  # (B, 3, |V|)
    s = (1.0 + c) / 2.0
    return s[:, 0] * s[:, 1] / (s[:, 2] + epsilon)


# -- targets --------------------------------------------------------------

def add_target(space, x1, y1, x2) -> np.ndarray:
    return (space.vector(y1) - space.vector(x1)) + space.vector(x2)


def avr_target(space, pairs, x2) -> np.ndarray:
    pairs = list(pairs)
    if not pairs:
        raise EmptyPairs("need at least one example pair")
    offsets = np.array([space.vector(y) - space.vector(x) for x, y in pairs])
    return offsets.mean(axis=0) + space.vector(x2)


def _tokens(space, words) -> list[str]:
    return list(dict.fromkeys(space.resolve(w) for w in words))


def branch_target(space, X, Y, x2) -> np.ndarray:
    X, Y = _tokens(space, X), _tokens(space, Y)
    return (space.vector(x2) - root([space.vector(x) for x in X])) + root([space.vector(y) for y in Y])


def filtered_branch(space, X, x2) -> np.ndarray | None:
    """Root over the branches of ``x2`` in the pair trees (x2, x_i); None if degenerate."""
    x2 = space.resolve(x2)
    v2 = space.vector(x2)
    betas = []
    for xi in _tokens(space, X):
        if xi == x2:
            continue
        try:
            betas.append(v2 - root([v2, space.vector(xi)]))
        except (DegenerateSupportSet, ZeroSum):
            logger.debug("pair tree (%s, %s) is degenerate; skipped", x2, xi)
    if not betas:
        return None
    try:
        return root(betas)
    except (DegenerateSupportSet, ZeroSum):
        return None


def filter_target(space, X, Y, x2) -> tuple[np.ndarray, bool]:
    """Target of ``ssn_filter`` and whether it fell back to ``ssn_branch``."""
    rb = filtered_branch(space, X, x2)
    if rb is None:
        logger.info("filtered branch of %s is degenerate; falling back to ssn_branch", x2)
        return branch_target(space, X, Y, x2), True
    Y = _tokens(space, Y)
    return rb + root([space.vector(y) for y in Y]), False


# -- single-question solvers ----------------------------------------------

def vec_of_add(space: EmbeddingSpace, x1: str, y1: str, x2: str, exclude_inputs: bool = True) -> str:
    t = add_target(space, x1, y1, x2)
    banned = [space.index(w) for w in (x1, y1, x2)] if exclude_inputs else []
    return space.words[_argmax_targets(space, t, [banned])[0]]


def vec_of_mul(space: EmbeddingSpace, x1: str, y1: str, x2: str, epsilon: float = EPSILON,
               exclude_inputs: bool = True) -> str:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    ids = [space.index(w) for w in (x1, y1, x2)]
    scores = _mul_scores(space, [ids[0]], [ids[1]], [ids[2]], epsilon)[0]
    return space.words[_pick(space, scores, ids if exclude_inputs else [])]


def vec_of_avr(space: EmbeddingSpace, pairs: Sequence[tuple[str, str]], x2: str) -> str:
    t = avr_target(space, pairs, x2)
    banned = {space.index(x2)} | {space.index(w) for p in pairs for w in p}
    return space.words[_argmax_targets(space, t, [sorted(banned)])[0]]


def _set_banned(space, X, Y) -> list[int]:
    return sorted({space.index(w) for w in list(X) + list(Y)})


def ssn_branch(space: EmbeddingSpace, X: Iterable[str], Y: Iterable[str], x2: str) -> str:
    X, Y = list(X), list(Y)
    t = branch_target(space, X, Y, x2)
    return space.words[_argmax_targets(space, t, [_set_banned(space, X, Y)])[0]]


def ssn_filter(space: EmbeddingSpace, X: Iterable[str], Y: Iterable[str], x2: str) -> str:
    X, Y = list(X), list(Y)
    t, _ = filter_target(space, X, Y, x2)
    return space.words[_argmax_targets(space, t, [_set_banned(space, X, Y)])[0]]


# -- benchmark ------------------------------------------------------------

@dataclass
class AnalogyReport:
    method: str
    source_tag: str
    sections: dict  # name -> {total, answered, correct, failed, accuracy}
    metadata: dict = field(default_factory=dict)

    def _sum(self, key):
        return sum(s[key] for s in self.sections.values())

    @property
    def total(self) -> int:
        return self._sum("total")

    @property
    def answered(self) -> int:
        return self._sum("answered")

    @property
    def correct(self) -> int:
        return self._sum("correct")

    @property
    def failed(self) -> int:
        return self._sum("failed")

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.answered if self.answered else None

    @property
    def coverage(self) -> float:
        return self.answered / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "display_name": DISPLAY.get(self.method, self.method),
            "source_tag": self.source_tag,
            "overall": {"accuracy": self.accuracy, "coverage": self.coverage, "total": self.total,
                        "answered": self.answered, "correct": self.correct, "failed": self.failed},
            "sections": self.sections,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def accuracy_table_tsv(reports: Sequence[AnalogyReport]) -> str:
    """Rows: method; columns: embedding source; cells: overall accuracy."""
    sources = list(dict.fromkeys(r.source_tag for r in reports))
    methods = list(dict.fromkeys(r.method for r in reports))
    cell = {(r.method, r.source_tag): r.accuracy for r in reports}
    lines = ["\t".join(["method"] + sources)]
    for m in methods:
        vals = []
        for s in sources:
            a = cell.get((m, s))
            vals.append("" if a is None else f"{a:.3f}")
        lines.append("\t".join([DISPLAY.get(m, m)] + vals))
    return "\n".join(lines) + "\n"


class _Section:
    """Vocabulary-resolved view of one section, with cached roots."""

    def __init__(self, space, name, pairs):
        self.space = space
        self.name = name
        found = [(space.find(x), space.find(y)) for x, y in pairs]
        self.pairs = list(dict.fromkeys((space.words[i], space.words[j])
                                        for i, j in found if i is not None and j is not None))
        self.X = list(dict.fromkeys(space.words[i] for i, _ in found if i is not None))
        self.Y = list(dict.fromkeys(space.words[j] for _, j in found if j is not None))
        self._root_x = None

    def y_without(self, y2):
        return [y for y in self.Y if y != y2]

    def root_x(self):
        if self._root_x is None:
            self._root_x = root([self.space.vector(x) for x in self.X])
        return self._root_x

    def target(self, method, x2, y2):
        """(target vector, banned indices) for a sub-vector or averaging method."""
        sp = self.space
        if method == "vec_of_avr":
            pairs = [p for p in self.pairs if p[1] != y2]
            t = avr_target(sp, pairs, x2)
            banned = {sp.index(x2)} | {sp.index(w) for p in pairs for w in p}
            return t, sorted(banned)
        Y = self.y_without(y2)
        if not Y:
            raise EmptyPairs(f"{self.name}: no Y words left once {y2!r} is held out")
        if len(self.X) < 2:
            raise DegenerateSupportSet(f"{self.name}: X needs at least two words")
        banned = _set_banned(sp, self.X, Y)
        root_y = root([sp.vector(y) for y in Y])
        if method == "ssn_filter":
            rb = filtered_branch(sp, self.X, x2)
            if rb is not None:
                return rb + root_y, banned
            logger.info("%s: filtered branch of %s degenerate; using ssn_branch", self.name, x2)
        return (sp.vector(x2) - self.root_x()) + root_y, banned


def run_analogy_benchmark(space: EmbeddingSpace, data: AnalogySections, method: str,
                          workers: int = 1, exclude_inputs: bool = True,
                          epsilon: float = EPSILON) -> AnalogyReport:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    sections = {name: _Section(space, name, pairs) for name, pairs in data.sections}
    stats = {name: {"total": 0, "answered": 0, "correct": 0, "failed": 0} for name in sections}

    # questions with every word in vocabulary, as index quadruples
    live = []
    for q in data.questions:
        st = stats.setdefault(q.section, {"total": 0, "answered": 0, "correct": 0, "failed": 0})
        st["total"] += 1
        ids = [space.find(w) for w in (q.x1, q.y1, q.x2, q.y2)]
        if any(i is None for i in ids):
            continue
        st["answered"] += 1
        live.append((q.section, ids))

    answers: list[int | None] = [None] * len(live)

    if method in ("vec_of_add", "vec_of_mul"):
        chunks = [range(s, min(s + _CHUNK, len(live))) for s in range(0, len(live), _CHUNK)]

        def solve(chunk):
            ids = np.array([live[k][1] for k in chunk])
            banned = [list(r[:3]) if exclude_inputs else [] for r in ids]
            if method == "vec_of_add":
                M = space.matrix
                T = (M[ids[:, 1]] - M[ids[:, 0]]) + M[ids[:, 2]]
                return _argmax_targets(space, T, banned)
            scores = _mul_scores(space, ids[:, 0], ids[:, 1], ids[:, 2], epsilon)
            return [_pick(space, scores[i], banned[i]) for i in range(len(chunk))]
    else:
        # the target depends only on (section, x2, y2): solve each key once
        keys = list(dict.fromkeys((sec, ids[2], ids[3]) for sec, ids in live))
        key_answer: dict = {}
        chunks = [keys[s:s + _CHUNK] for s in range(0, len(keys), _CHUNK)]

        def solve(chunk):
            targets, banned, ok = [], [], []
            for sec, i2, j2 in chunk:
                try:
                    t, b = sections[sec].target(method, space.words[i2], space.words[j2])
                except DataError as exc:
                    logger.info("%s: cannot answer for %s -> %s: %s", sec, space.words[i2], space.words[j2], exc)
                    ok.append(False)
                    continue
                targets.append(t)
                banned.append(b)
                ok.append(True)
            picked = iter(_argmax_targets(space, np.array(targets), banned) if targets else [])
            return [next(picked) if good else None for good in ok]

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(solve, chunks))
    else:
        solved = [solve(c) for c in chunks]

    if method in ("vec_of_add", "vec_of_mul"):
        for chunk, res in zip(chunks, solved):
            for k, a in zip(chunk, res):
                answers[k] = a
    else:
        for chunk, res in zip(chunks, solved):
            key_answer.update(zip(chunk, res))
        answers = [key_answer[(sec, ids[2], ids[3])] for sec, ids in live]

    for (sec, ids), a in zip(live, answers):
        if a is None:
            stats[sec]["failed"] += 1
        elif a == ids[3]:
            stats[sec]["correct"] += 1
    for st in stats.values():
        st["accuracy"] = st["correct"] / st["answered"] if st["answered"] else None

    metadata = {
        "vocab_size": len(space),
        "lowercase_fallback": space.lowercase_fallback,
        "exclude_inputs": exclude_inputs if method in ("vec_of_add", "vec_of_mul") else True,
        "questions": len(data.questions),
    }
    if method == "vec_of_mul":
        metadata["epsilon"] = epsilon
        metadata["similarity"] = "(1 + cos) / 2"
    if method in ("vec_of_avr", "ssn_branch", "ssn_filter"):
        metadata["held_out"] = "y2 removed from Y and from the example pairs"
    return AnalogyReport(method, space.source_tag, stats, metadata)
