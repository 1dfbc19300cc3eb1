import numpy as np
import pytest

from subvec.embed_io import EmbeddingSpace


def make_space(mapping, **kw) -> EmbeddingSpace:
    return EmbeddingSpace.from_dict({k: np.asarray(v, dtype=float) for k, v in mapping.items()}, **kw)


def random_space(rng, n, dim, shift=0.0, prefix="w") -> EmbeddingSpace:
    M = rng.normal(size=(n, dim))
    M[:, 0] += shift
    return EmbeddingSpace([f"{prefix}{i:03d}" for i in range(n)], M)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance results, printed once at the end of the session
_ACCEPTANCE = {}


def record(n, title, status, detail):
    _ACCEPTANCE[n] = f"{status} criterion {n} ({title}): {detail}"
    return _ACCEPTANCE[n]


def pytest_terminal_summary(terminalreporter):
    # pytest may load this file as a plugin and as a plain module; merge both
    import sys
    lines = dict(_ACCEPTANCE)
    mod = sys.modules.get("conftest")
    if mod is not None and mod is not sys.modules.get(__name__):
        lines.update(getattr(mod, "_ACCEPTANCE", {}))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
