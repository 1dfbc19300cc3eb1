"""Exception hierarchy.

Everything raised on purpose derives from :class:`SubvecError`, so callers
(the CLI in particular) can map whole families to exit codes.
"""


class SubvecError(Exception):
    """Base class for library errors."""


# -- file formats ---------------------------------------------------------

class FormatError(SubvecError, ValueError):
    """A data file does not follow its declared layout."""


class MalformedHeader(FormatError):
    pass


class TruncatedRecord(FormatError):
    pass


class InconsistentDimension(FormatError):
    def __init__(self, line, expected, got):
        super().__init__(f"line {line}: expected {expected} values, got {got}")
        self.line = line
        self.expected = expected
        self.got = got


class UnparsableNumber(FormatError):
    def __init__(self, line, text=""):
        super().__init__(f"line {line}: cannot parse number {text!r}")
        self.line = line


class NonFiniteValue(FormatError):
    def __init__(self, word):
        super().__init__(f"non-finite value in vector of {word!r}")
        self.word = word


class EmptyVocabulary(FormatError):
    pass


class MalformedLine(FormatError):
    def __init__(self, lineno, text=""):
        super().__init__(f"line {lineno}: malformed {text!r}")
        self.lineno = lineno


class NoSections(FormatError):
    pass


class SchemaViolation(FormatError):
    pass


class DuplicateCategory(FormatError):
    pass


class EmptyCategory(FormatError):
    pass


# -- data / query errors --------------------------------------------------

class DataError(SubvecError):
    """The query is well-formed but the data cannot answer it."""


class OutOfVocabulary(DataError, KeyError):
    def __init__(self, word):
        super().__init__(word)
        self.word = word

    def __str__(self):
        return f"out of vocabulary: {self.word!r}"


class DimensionMismatch(DataError, ValueError):
    pass


class ZeroQueryVector(DataError, ValueError):
    pass


class ZeroDelta(DataError, ValueError):
    pass


class ZeroSum(DataError, ValueError):
    pass


class DegenerateSupportSet(DataError, ValueError):
    def __init__(self, msg="non-positive smallest projection onto the support sum", tree=None):
        if tree is not None:
            msg = f"{tree}: {msg}"
        super().__init__(msg)
        self.tree = tree


class IndexOutOfRange(DataError, IndexError):
    pass


class ScaleOutOfRange(DataError, ValueError):
    pass


class EmptyAfterVocabFilter(DataError):
    pass


class EmptyGold(DataError, ValueError):
    pass


class EmptyClass(DataError, ValueError):
    pass


class EmptyPairs(DataError, ValueError):
    pass


class ArityMismatch(SubvecError, ValueError):
    """Wrong number of words for a network shape (a usage error)."""
