"""``subvec`` command line.

stdout carries the report only; diagnostics go to stderr.  Exit codes:
0 success, 2 data error (OOV, degenerate trees), 64 usage, 74 I/O or format.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import analogy, categorize, corpora, decomp, ssn
from .embed_io import EmbeddingSpace, VocabFilter, load_embeddings
from .errors import ArityMismatch, DataError, FormatError, SubvecError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64
EXIT_IO = 74

log = logging.getLogger("subvec")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    embeddings: tuple[str, ...]
    formats: tuple[str, ...]
    vfilter: VocabFilter
    output: str = "json"
    out: str | None = None
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        paths = tuple(args.embeddings or ())
        fmts = tuple(args.format or ())
        if not paths:
            raise UsageError("--embeddings is required")
        if not fmts:
            raise UsageError("--format is required")
        if len(fmts) == 1:
            fmts = fmts * len(paths)
        if len(fmts) != len(paths):
            raise UsageError("give one --format, or one per --embeddings")
        if args.max_vocab is not None and args.max_vocab < 1:
            raise UsageError("--max-vocab must be positive")
        vf = VocabFilter(args.max_vocab, args.drop_multiword, args.lowercase_fallback)
        return cls(paths, fmts, vf, args.output, args.out, args.seed)

    def spaces(self):
        for path, fmt in zip(self.embeddings, self.formats):
            log.info("loading %s (%s)", path, fmt)
            yield load_embeddings(path, fmt, self.vfilter)

    def space(self) -> EmbeddingSpace:
        if len(self.embeddings) != 1:
            raise UsageError("this command takes a single --embeddings file")
        return next(self.spaces())


def _split(text: str | None) -> list[str]:
    if not text:
        return []
    return [w.strip() for w in text.split(",") if w.strip()]


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in _split(text)]
    except ValueError:
        raise UsageError(f"bad fraction list {text!r}") from None
    if not vals or any(not 0.0 < v <= 1.0 for v in vals):
        raise UsageError("fractions must lie in (0, 1]")
    return vals


def _emit(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(cfg.out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- commands -------------------------------------------------------------

def cmd_children(cfg: RunConfig, args) -> int:
    words = _split(args.words)
    if not words:
        raise UsageError("--words needs at least one word")
    space = cfg.space()
    toks = [space.resolve(w) for w in words]
    alpha = decomp.root([space.vector(t) for t in toks])
    rep = decomp.children(space, alpha)
    shown = rep.children if args.k_cap is None else rep.children[:args.k_cap]
    norm = float(decomp.sqnorm(alpha)) ** 0.5
    if cfg.output == "tsv":
        lines = [f"# words\t{','.join(toks)}", f"# root_norm\t{norm!r}", f"# count\t{rep.count}",
                 "rank\tword\tmargin"]
        lines += [f"{i}\t{w}\t{m!r}" for i, (w, m) in enumerate(shown, 1)]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, _json({
            "words": toks,
            "root_norm": norm,
            "count": rep.count,
            "children": [{"word": w, "margin": m} for w, m in shown],
            "source_tag": space.source_tag,
        }))
    return EXIT_OK


def cmd_ssn(cfg: RunConfig, args) -> int:
    shape = getattr(args, "shape", None) or "tree"
    words = _split(args.words)
    space = cfg.space()
    net = ssn.build_ssn(space, shape, words)
    report = ssn.describe(net, space, k_cap=args.k_cap)
    if cfg.output == "tsv":
        lines = ["node\tnorm\tcount\tchildren"]
        for name, node in report["nodes"].items():
            count = "degenerate" if node.get("degenerate") else str(node["count"])
            kids = ",".join(c["word"] for c in node["children"])
            lines.append(f"{name}\t{node['norm']!r}\t{count}\t{kids}")
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        report["source_tag"] = space.source_tag
        _emit(cfg, _json(report))
    return EXIT_OK


def _category_corpus(name: str):
    if name == "closed":
        return corpora.load_closed_corpus()
    if name == "google":
        return corpora.analogy_sections_to_categories(corpora.load_google_analogy())
    if name.endswith(".txt"):
        return corpora.analogy_sections_to_categories(corpora.parse_google_analogy(name))
    return corpora.load_category_corpus(name)


def cmd_eval_category(cfg: RunConfig, args) -> int:
    methods = _split(args.methods) or list(categorize.DEFAULT_METHODS)
    for m in methods:
        try:
            categorize._negatives(m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.runs < 1 or args.workers < 1:
        raise UsageError("--runs and --workers must be positive")
    fractions = _floats(args.fractions)
    corpus = _category_corpus(args.corpus)
    space = cfg.space()
    report = categorize.run_category_benchmark(space, corpus, fractions, methods, n_runs=args.runs,
                                               base_seed=cfg.seed, workers=args.workers)
    _emit(cfg, report.to_tsv() if cfg.output == "tsv" else report.to_json())
    return EXIT_OK


def cmd_eval_analogy(cfg: RunConfig, args) -> int:
    methods = _split(args.methods) or list(analogy.METHODS)
    bad = [m for m in methods if m not in analogy.METHODS]
    if bad:
        raise UsageError(f"unknown method {bad[0]!r}; choose from {', '.join(analogy.METHODS)}")
    if args.workers < 1:
        raise UsageError("--workers must be positive")
    if args.corpus == "google":
        data = corpora.load_google_analogy()
    else:
        data = corpora.parse_google_analogy(args.corpus)
    reports = []
    for space in cfg.spaces():
        for m in methods:
            log.info("%s on %s", m, space.source_tag)
            reports.append(analogy.run_analogy_benchmark(space, data, m, workers=args.workers,
                                                         epsilon=args.epsilon))
    if cfg.output == "tsv":
        _emit(cfg, analogy.accuracy_table_tsv(reports))
    else:
        _emit(cfg, _json({"reports": [r.to_dict() for r in reports]}))
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("embeddings and output")
    g.add_argument("--embeddings", action="append", metavar="PATH")
    g.add_argument("--format", action="append", choices=("glove", "word2vec"))
    g.add_argument("--max-vocab", type=int, metavar="N")
    g.add_argument("--drop-multiword", action="store_true")
    g.add_argument("--lowercase-fallback", action="store_true")
    g.add_argument("--output", choices=("json", "tsv"), default="json")
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="subvec", description="Sub-vector decomposition of word embeddings.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("children", parents=[common], help="root of the given words and its children")
    c.add_argument("--words", required=True, help="comma-separated words")
    c.add_argument("--k-cap", type=int, metavar="K", help="list at most K children")
    c.set_defaults(func=cmd_children)

    for name, helptext in (("tree", "describe a single semantic tree"), ("ssn", "describe a semantic space network")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--words", required=True)
        s.add_argument("--k-cap", type=int, default=10, metavar="K")
        if name == "ssn":
            s.add_argument("--shape", choices=sorted(ssn.SHAPES), default="binary")
        s.set_defaults(func=cmd_ssn)

    e = sub.add_parser("eval-category", parents=[common], help="category completion benchmark")
    e.add_argument("--corpus", default="closed", help="'closed', 'google', or a corpus file")
    e.add_argument("--fractions", default="0.1,0.2,0.3,0.4")
    e.add_argument("--methods", help=f"comma-separated; default {','.join(categorize.DEFAULT_METHODS)}")
    e.add_argument("--runs", type=int, default=5)
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_eval_category)

    a = sub.add_parser("eval-analogy", parents=[common], help="Google analogy benchmark")
    a.add_argument("--corpus", default="google", help="'google' or a questions-words file")
    a.add_argument("--methods", help=f"comma-separated; default {','.join(analogy.METHODS)}")
    a.add_argument("--epsilon", type=float, default=analogy.EPSILON)
    a.add_argument("--workers", type=int, default=1)
    a.set_defaults(func=cmd_eval_analogy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(stream=sys.stderr, format="subvec: %(levelname)s: %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        cfg = RunConfig.from_args(args)
        k_cap = getattr(args, "k_cap", None)
        if k_cap is not None and k_cap < 0:
            raise UsageError("--k-cap must be >= 0")
        return args.func(cfg, args)
    except (UsageError, ArityMismatch) as exc:
        print(f"subvec: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"subvec: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FormatError, OSError) as exc:
        print(f"subvec: {exc}", file=sys.stderr)
        return EXIT_IO
    except SubvecError as exc:
        print(f"subvec: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"subvec: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
