"""Category completion: recover a category's members from a few examples.

Methods compared by :func:`run_category_benchmark`:

``baseline``  the examples alone.
``ssn``       examples plus the children of the examples' root.
``svmN``      examples plus every word a linear SVM, trained on the examples
              against ``N`` sampled negative words, labels positive.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .corpora import Category, CategoryCorpus
from .decomp import children, root
from .embed_io import EmbeddingSpace
from .errors import DegenerateSupportSet, EmptyAfterVocabFilter, EmptyGold, ZeroSum
from .svm import SvmParams, train_linear_svm

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4)
DEFAULT_METHODS = ("baseline", "ssn", "svm100", "svm500")


def derive_seed(base_seed: int, *keys) -> int:
    """Stable 63-bit seed from a base seed and arbitrary keys."""
    h = hashlib.blake2b(repr((int(base_seed),) + tuple(keys)).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "big") >> 1


def example_count(fraction: float, n: int) -> int:
    """``max(1, round(fraction * n))``, rounding half up on the decimal value."""
    exact = Fraction(repr(float(fraction))) * n
    return max(1, min(n, math.floor(exact + Fraction(1, 2))))


def sample_split(category: Category | Sequence[str], fraction: float, seed: int):
    """Draw the example words; returns ``(examples, held_out)`` in member order."""
    members = tuple(category.members if isinstance(category, Category) else category)
    if not members:
        raise EmptyAfterVocabFilter("no category members left in the vocabulary")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction {fraction} outside (0, 1]")
    k = example_count(fraction, len(members))
    chosen = set(np.random.default_rng(seed).permutation(len(members))[:k].tolist())
    examples = tuple(m for i, m in enumerate(members) if i in chosen)
    held_out = tuple(m for i, m in enumerate(members) if i not in chosen)
    return examples, held_out


def complete_category(space: EmbeddingSpace, examples: Iterable[str]) -> set[str]:
    toks = [space.resolve(w) for w in examples]
    if not toks:
        raise ValueError("need at least one example")
    try:
        alpha = root([space.vector(t) for t in toks])
    except (DegenerateSupportSet, ZeroSum) as exc:
        logger.info("degenerate root for %s (%s); returning examples only", toks, exc)
        return set(toks)
    return set(toks) | set(children(space, alpha).words)


def f1_set(predicted: Iterable[str], gold: Iterable[str]) -> float:
    predicted, gold = set(predicted), set(gold)
    if not gold:
        raise EmptyGold("gold set is empty")
    hit = len(predicted & gold)
    if not predicted or hit == 0:
        return 0.0
    # 2PR / (P + R) with P = hit/|pred|, R = hit/|gold|, as one rounded division
    return 2 * hit / (len(predicted) + len(gold))


def svm_complete_category(space: EmbeddingSpace, examples: Iterable[str], n_negatives: int,
                          seed: int, params: SvmParams = SvmParams()) -> set[str]:
    toks = list(dict.fromkeys(space.resolve(w) for w in examples))
    pos_idx = np.array([space.index(t) for t in toks])
    pool = np.setdiff1d(np.arange(len(space)), pos_idx)
    rng = np.random.default_rng(seed)
    if n_negatives >= len(pool):
        neg_idx = pool
    else:
        neg_idx = np.sort(rng.choice(pool, size=n_negatives, replace=False))
    model = train_linear_svm(space.matrix[pos_idx], space.matrix[neg_idx], params,
                             seed=int(rng.integers(2**63 - 1)))
    hits = np.flatnonzero(model.predict(space.matrix))
    return set(toks) | {space.words[i] for i in hits}


def _negatives(method: str) -> int | None:
    if method.startswith("svm"):
        try:
            n = int(method[3:])
        except ValueError:
            raise ValueError(f"unknown method {method!r}") from None
        if n < 1:
            raise ValueError(f"unknown method {method!r}")
        return n
    if method in ("baseline", "ssn"):
        return None
    raise ValueError(f"unknown method {method!r}")


def vocab_filter_corpus(space: EmbeddingSpace, corpus: CategoryCorpus):
    """Map members to vocabulary tokens; returns (kept categories, skipped names, dropped)."""
    kept, skipped, dropped = [], [], {}
    for cat in corpus:
        toks, missing = [], []
        for m in cat.members:
            i = space.find(m)
            if i is None:
                missing.append(m)
            else:
                toks.append(space.words[i])
        toks = list(dict.fromkeys(toks))
        if missing:
            dropped[cat.name] = missing
        if toks:
            kept.append(Category(cat.name, tuple(toks)))
        else:
            skipped.append(cat.name)
    return kept, skipped, dropped


def _fmt_fraction(f: float) -> str:
    return repr(float(f))


@dataclass
class CategoryEvalReport:
    corpus: str
    methods: list[str]
    fractions: list[float]
    # per_category[method][fraction][category] -> list of per-run F1
    runs: dict
    metadata: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    dropped: dict = field(default_factory=dict)

    def category_mean(self, method: str, fraction: float, category: str) -> float:
        vals = self.runs[method][_fmt_fraction(fraction)][category]
        return float(np.mean(vals))

    def mean(self, method: str, fraction: float) -> float | None:
        """Macro average over categories of the per-category mean F1; None if no category survived."""
        per = self.runs[method][_fmt_fraction(fraction)]
        if not per:
            return None
        return float(np.mean([np.mean(v) for v in per.values()]))

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "metadata": self.metadata,
            "table": {m: {_fmt_fraction(f): self.mean(m, f) for f in self.fractions} for m in self.methods},
            "per_category": {
                m: {_fmt_fraction(f): {c: float(np.mean(v)) for c, v in self.runs[m][_fmt_fraction(f)].items()}
                    for f in self.fractions}
                for m in self.methods
            },
            "runs": self.runs,
            "skipped_categories": self.skipped,
            "dropped_members": self.dropped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_tsv(self) -> str:
        head = ["method"] + [f"{100 * f:g}" for f in self.fractions]
        lines = ["\t".join(head)]
        for m in self.methods:
            vals = [self.mean(m, f) for f in self.fractions]
            lines.append("\t".join([m] + ["" if v is None else f"{v:.3f}" for v in vals]))
        return "\n".join(lines) + "\n"


def run_category_benchmark(space: EmbeddingSpace, corpus: CategoryCorpus,
                           fractions: Sequence[float] = DEFAULT_FRACTIONS,
                           methods: Sequence[str] = DEFAULT_METHODS,
                           n_runs: int = 5, base_seed: int = 0, workers: int = 1,
                           svm_params: SvmParams = SvmParams()) -> CategoryEvalReport:
    methods = list(methods)
    for m in methods:
        _negatives(m)
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    cats, skipped, dropped = vocab_filter_corpus(space, corpus)
    for name in skipped:
        logger.warning("category %s has no members in the vocabulary; skipped", name)

    def task(job):
        fraction, cat, run = job
        seed = derive_seed(base_seed, cat.name, run)
        examples, _ = sample_split(cat, fraction, seed)
        out = {}
        for m in methods:
            n_neg = _negatives(m)
            if m == "baseline":
                pred = set(examples)
            elif m == "ssn":
                pred = complete_category(space, examples)
            else:
                pred = svm_complete_category(space, examples, n_neg,
                                             derive_seed(base_seed, cat.name, run, m, _fmt_fraction(fraction)),
                                             svm_params)
            out[m] = f1_set(pred, cat.members)
        return out

    jobs = [(f, c, r) for f in fractions for c in cats for r in range(n_runs)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, jobs))
    else:
        results = [task(j) for j in jobs]

    runs = {m: {_fmt_fraction(f): {c.name: [] for c in cats} for f in fractions} for m in methods}
    for (f, c, _), res in zip(jobs, results):
        for m, v in res.items():
            runs[m][_fmt_fraction(f)][c.name].append(v)

    metadata = {
        "n_runs": n_runs,
        "base_seed": base_seed,
        "seed_rule": "blake2b(base_seed, category, run)",
        "vocab_size": len(space),
        "source_tag": space.source_tag,
        "example_count": "max(1, round_half_up(fraction * |members|))",
        "svm": svm_params.as_dict(),
    }
    return CategoryEvalReport(corpus.name, methods, [float(f) for f in fractions], runs,
                              metadata, skipped, dropped)
