"""Evaluation datasets: the Google analogy questions and category corpora."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DuplicateCategory, EmptyCategory, MalformedLine, NoSections, SchemaViolation


@dataclass(frozen=True)
class AnalogyQuestion:
    x1: str
    y1: str
    x2: str
    y2: str  # gold answer
    section: str = ""


@dataclass(frozen=True)
class AnalogySections:
    """Deduplicated ``(x, y)`` pairs per section plus the raw question list."""

    sections: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]
    questions: tuple[AnalogyQuestion, ...] = ()

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.sections]

    def pairs(self, name: str) -> tuple[tuple[str, str], ...]:
        for n, pairs in self.sections:
            if n == name:
                return pairs
        raise KeyError(name)

    @property
    def slot_count(self) -> int:
        """Total pair slots, i.e. two per deduplicated pair."""
        return sum(2 * len(p) for _, p in self.sections)

    def __len__(self):
        return len(self.sections)


@dataclass(frozen=True)
class Category:
    name: str
    members: tuple[str, ...]

    def __post_init__(self):
        if not self.members:
            raise EmptyCategory(f"category {self.name!r} has no members")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"category {self.name!r} has duplicate members")

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class CategoryCorpus:
    name: str
    categories: tuple[Category, ...]

    def __post_init__(self):
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise DuplicateCategory(f"duplicate category names in {self.name!r}")

    def __iter__(self):
        return iter(self.categories)

    def __len__(self):
        return len(self.categories)

    def __getitem__(self, name: str) -> Category:
        for c in self.categories:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def total_members(self) -> int:
        return sum(len(c) for c in self.categories)


# -- Google analogy text --------------------------------------------------

def parse_google_analogy_lines(lines) -> AnalogySections:
    order: list[str] = []
    pairs: dict[str, dict[tuple[str, str], None]] = {}
    questions = []
    current = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(":"):
            current = line[1:].strip()
            if not current:
                raise MalformedLine(lineno, raw)
            if current not in pairs:
                order.append(current)
                pairs[current] = {}
            continue
        tokens = line.split()
        if len(tokens) != 4 or current is None:
            raise MalformedLine(lineno, raw.rstrip("\n"))
        a, b, c, d = tokens
        pairs[current].setdefault((a, b), None)
        pairs[current].setdefault((c, d), None)
        questions.append(AnalogyQuestion(a, b, c, d, current))
    sections = tuple((n, tuple(pairs[n])) for n in order if pairs[n])
    if not sections:
        raise NoSections("no non-empty ': section' blocks found")
    return AnalogySections(sections, tuple(questions))


def parse_google_analogy(path) -> AnalogySections:
    with open(path, encoding="utf-8") as fh:
        return parse_google_analogy_lines(fh)


def format_google_analogy(data: AnalogySections) -> str:
    """Serialize questions back to the text layout, grouped by section."""
    out = []
    for name in data.names:
        out.append(f": {name}")
        out.extend(f"{q.x1} {q.y1} {q.x2} {q.y2}" for q in data.questions if q.section == name)
    return "\n".join(out) + "\n"


def analogy_sections_to_categories(data: AnalogySections, name: str = "google-analogy") -> CategoryCorpus:
    """Two categories per section: the distinct x-side and y-side tokens."""
    cats = []
    for section, pairs in data.sections:
        xs = tuple(dict.fromkeys(x for x, _ in pairs))
        ys = tuple(dict.fromkeys(y for _, y in pairs))
        cats.append(Category(f"{section}/x", xs))
        cats.append(Category(f"{section}/y", ys))
    return CategoryCorpus(name, tuple(cats))


# -- category JSON --------------------------------------------------------

def _no_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise DuplicateCategory(f"key {k!r} appears twice")
        seen[k] = v
    return seen


def parse_category_corpus(text: str) -> CategoryCorpus:
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("categories"), dict):
        raise SchemaViolation('expected {"name": ..., "categories": {...}}')
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SchemaViolation("name must be a string")
    cats = []
    for cname, members in doc["categories"].items():
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            raise SchemaViolation(f"category {cname!r} must be a list of strings")
        cats.append(Category(cname, tuple(dict.fromkeys(members))))
    if not cats:
        raise SchemaViolation("no categories")
    return CategoryCorpus(name, tuple(cats))


def load_category_corpus(path) -> CategoryCorpus:
    return parse_category_corpus(Path(path).read_text(encoding="utf-8"))


def dump_category_corpus(corpus: CategoryCorpus) -> str:
    doc = {"name": corpus.name, "categories": {c.name: list(c.members) for c in corpus}}
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


# -- bundled data ---------------------------------------------------------

def _data_path(name: str) -> Path:
    return Path(str(resources.files("subvec") / "data" / name))


def google_analogy_path() -> Path:
    return _data_path("questions-words.txt")


def closed_corpus_path() -> Path:
    return _data_path("closed_categories.json")


def load_google_analogy() -> AnalogySections:
    return parse_google_analogy(google_analogy_path())


def load_closed_corpus() -> CategoryCorpus:
    return load_category_corpus(closed_corpus_path())
