"""Pretrained embedding files: loading, vocabulary filtering, lookup, neighbors.

Vectors are kept raw (never normalized) and widened to float64 on load.
File order is taken as frequency rank, so ``max_vocab`` keeps the head of the
file after multi-word tokens have been dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyVocabulary,
    InconsistentDimension,
    MalformedHeader,
    NonFiniteValue,
    OutOfVocabulary,
    TruncatedRecord,
    UnparsableNumber,
    ZeroQueryVector,
)

logger = logging.getLogger(__name__)

# word2vec binary tokens are arbitrary bytes; surrogateescape keeps them
# byte-for-byte through a str round trip.
TOKEN_ENCODING = "utf-8"
TOKEN_ERRORS = "surrogateescape"


@dataclass(frozen=True)
class VocabFilter:
    max_vocab: int | None = None
    drop_multiword: bool = False
    lowercase_fallback: bool = False

    def __post_init__(self):
        if self.max_vocab is not None and self.max_vocab < 1:
            raise ValueError("max_vocab must be >= 1")

    def rejects(self, token: str) -> bool:
        return self.drop_multiword and ("_" in token or " " in token)


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Immutable vocabulary plus a ``len(words) x dim`` float64 matrix."""

    words: tuple[str, ...]
    matrix: np.ndarray
    source_tag: str = ""
    lowercase_fallback: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or matrix.shape[1] < 1:
            raise DimensionMismatch(f"matrix must be 2-D with dim >= 1, got shape {matrix.shape}")
        if matrix.shape[0] != len(words):
            raise DimensionMismatch(f"{len(words)} words but {matrix.shape[0]} rows")
        if not words:
            raise EmptyVocabulary("space has no words")
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise ValueError("duplicate tokens in vocabulary")
        bad = ~np.isfinite(matrix).all(axis=1)
        if bad.any():
            raise NonFiniteValue(words[int(np.flatnonzero(bad)[0])])
        matrix.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_dict(cls, vectors: dict, **kwargs) -> "EmbeddingSpace":
        words = list(vectors)
        return cls(tuple(words), np.array([vectors[w] for w in words], dtype=np.float64), **kwargs)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return self.find(word) is not None

    def find(self, word: str) -> int | None:
        """Row index of ``word``, honouring the lowercase fallback; None if absent."""
        i = self._index.get(word)
        if i is None and self.lowercase_fallback:
            i = self._index.get(word.lower())
        return i

    def index(self, word: str) -> int:
        i = self.find(word)
        if i is None:
            raise OutOfVocabulary(word)
        return i

    def resolve(self, word: str) -> str:
        """The vocabulary token that ``word`` maps to."""
        return self.words[self.index(word)]

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self.index(word)]

    @cached_property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.matrix, axis=1)

    @cached_property
    def unit_matrix(self) -> np.ndarray:
        """Rows scaled to unit length (zero rows stay zero)."""
        n = self.norms[:, None]
        return np.divide(self.matrix, n, out=np.zeros_like(self.matrix), where=n > 0)

    @cached_property
    def lex_rank(self) -> np.ndarray:
        """Position of every row in lexicographic token order (tie-breaking)."""
        order = sorted(range(len(self.words)), key=self.words.__getitem__)
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank

    def cosines(self, q) -> np.ndarray:
        """Cosine of ``q`` against every row; rows of zero norm score 0."""
        q = as_vector(q, self.dim)
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            raise ZeroQueryVector("query vector has zero norm")
        denom = self.norms * qn
        dots = self.matrix @ q
        return np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)


def as_vector(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dim {dim}, got {v.shape[0]}")
    return v


def lookup(space: EmbeddingSpace, word: str) -> np.ndarray:
    return space.vector(word)


def cosine_neighbors(space: EmbeddingSpace, q, k: int, exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
    """Top-``k`` tokens by cosine with ``q``, descending, ties broken by token."""
    if k < 1:
        raise ValueError("k must be positive")
    scores = space.cosines(q)
    banned = {i for i in (space.find(w) for w in exclude) if i is not None}
    order = np.lexsort((space.lex_rank, -scores))
    out = []
    for i in order:
        if i in banned:
            continue
        out.append((space.words[i], float(scores[i])))
        if len(out) == k:
            break
    return out


# -- loaders --------------------------------------------------------------

class _Collector:
    """Applies a VocabFilter while rows stream in from a file."""

    def __init__(self, vfilter: VocabFilter):
        self.vfilter = vfilter
        self.words: list[str] = []
        self.rows: list[np.ndarray] = []
        self.seen: set[str] = set()

    @property
    def full(self) -> bool:
        cap = self.vfilter.max_vocab
        return cap is not None and len(self.words) >= cap

    def add(self, token: str, row: np.ndarray):
        if self.vfilter.rejects(token):
            return
        if token in self.seen:
            logger.warning("duplicate token %r ignored (first occurrence kept)", token)
            return
        if not np.isfinite(row).all():
            raise NonFiniteValue(token)
        self.seen.add(token)
        self.words.append(token)
        self.rows.append(row)

    def build(self, dim: int, source_tag: str) -> EmbeddingSpace:
        if not self.words:
            raise EmptyVocabulary("no entries survived loading/filtering")
        matrix = np.vstack(self.rows).astype(np.float64, copy=False)
        return EmbeddingSpace(tuple(self.words), matrix, source_tag=source_tag,
                              lowercase_fallback=self.vfilter.lowercase_fallback)


def _tag(path, kind: str, vfilter: VocabFilter) -> str:
    parts = [f"{kind}:{path}"]
    if vfilter.max_vocab is not None:
        parts.append(f"max_vocab={vfilter.max_vocab}")
    if vfilter.drop_multiword:
        parts.append("drop_multiword")
    return " ".join(parts)


class _ByteReader:
    def __init__(self, fh, block=1 << 20):
        self.fh = fh
        self.block = block
        self.buf = b""
        self.pos = 0

    def _fill(self) -> bool:
        chunk = self.fh.read(self.block)
        if not chunk:
            return False
        self.buf = self.buf[self.pos:] + chunk
        self.pos = 0
        return True

    def at_eof(self) -> bool:
        return self.pos >= len(self.buf) and not self._fill()

    def skip_newlines(self):
        while True:
            while self.pos < len(self.buf) and self.buf[self.pos] in (0x0A, 0x0D):
                self.pos += 1
            if self.pos < len(self.buf) or not self._fill():
                return

    def read_until_space(self) -> bytes | None:
        scan = self.pos
        while True:
            j = self.buf.find(b" ", scan)
            if j >= 0:
                out = self.buf[self.pos:j]
                self.pos = j + 1
                return out
            scanned = len(self.buf) - self.pos
            if not self._fill():
                return None
            scan = self.pos + scanned

    def read_exact(self, n: int) -> bytes | None:
        while len(self.buf) - self.pos < n:
            if not self._fill():
                return None
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out


def load_word2vec_binary(path: str | PathLike, vfilter: VocabFilter = VocabFilter()) -> EmbeddingSpace:
    """Read the original word2vec ``.bin`` layout.

    Header ``"<count> <dim>\\n"``, then per entry the token bytes, one space,
    ``dim`` little-endian float32 values and an optional newline.
    """
    with open(path, "rb") as fh:
        header = fh.readline()
        try:
            count, dim = (int(x) for x in header.decode("ascii").split())
        except (UnicodeDecodeError, ValueError):
            raise MalformedHeader(f"bad word2vec header {header[:40]!r}") from None
        if count < 0 or dim < 1:
            raise MalformedHeader(f"bad word2vec header {header[:40]!r}")
        reader = _ByteReader(fh)
        out = _Collector(vfilter)
        nbytes = 4 * dim
        for n in range(count):
            if out.full:
                break
            reader.skip_newlines()
            raw = reader.read_until_space()
            if raw is None:
                raise TruncatedRecord(f"entry {n}: file ends inside a token")
            payload = reader.read_exact(nbytes)
            if payload is None:
                raise TruncatedRecord(f"entry {n}: file ends inside the vector")
            token = raw.decode(TOKEN_ENCODING, TOKEN_ERRORS)
            out.add(token, np.frombuffer(payload, dtype="<f4").astype(np.float64))
    return out.build(dim, _tag(path, "word2vec", vfilter))


def load_glove_text(path: str | PathLike, vfilter: VocabFilter = VocabFilter()) -> EmbeddingSpace:
    """Read GloVe-style text: ``token v1 ... vd`` per line, single spaces."""
    out = _Collector(vfilter)
    dim = None
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r").rstrip(" ")
            if not line:
                continue
            parts = line.split(" ")
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise InconsistentDimension(lineno, "at least 1", 0)
            elif len(parts) - 1 != dim:
                raise InconsistentDimension(lineno, dim, len(parts) - 1)
            if out.full:
                break
            try:
                row = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                bad = next((p for p in parts[1:] if not _is_float(p)), "")
                raise UnparsableNumber(lineno, bad) from None
            out.add(parts[0], row)
    if dim is None:
        raise EmptyVocabulary(f"{path}: no lines")
    return out.build(dim, _tag(path, "glove", vfilter))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_embeddings(path, fmt: str, vfilter: VocabFilter = VocabFilter()) -> EmbeddingSpace:
    if fmt == "word2vec":
        return load_word2vec_binary(path, vfilter)
    if fmt == "glove":
        return load_glove_text(path, vfilter)
    raise ValueError(f"unknown embedding format {fmt!r}")


# -- writers (fixtures, round trips) --------------------------------------

def write_word2vec_binary(path, words: Sequence[str], matrix, trailing_newline: bool = True):
    """Write the word2vec binary layout; values are stored as float32."""
    matrix = np.asarray(matrix)
    if matrix.shape[0] != len(words):
        raise DimensionMismatch(f"{len(words)} words but {matrix.shape[0]} rows")
    with open(path, "wb") as fh:
        fh.write(f"{len(words)} {matrix.shape[1]}\n".encode("ascii"))
        for word, row in zip(words, matrix):
            fh.write(word.encode(TOKEN_ENCODING, TOKEN_ERRORS) + b" ")
            fh.write(np.asarray(row, dtype="<f4").tobytes())
            if trailing_newline:
                fh.write(b"\n")


def write_glove_text(path, words: Sequence[str], matrix):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, row in zip(words, np.asarray(matrix, dtype=np.float64)):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")
