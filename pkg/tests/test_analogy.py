import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subvec.analogy import (
    METHODS,
    add_target,
    avr_target,
    branch_target,
    filter_target,
    run_analogy_benchmark,
    ssn_branch,
    ssn_filter,
    accuracy_table_tsv,
    vec_of_add,
    vec_of_avr,
    vec_of_mul,
)
from subvec.corpora import AnalogySections, parse_google_analogy_lines
from subvec.decomp import root
from subvec.embed_io import EmbeddingSpace
from subvec.errors import DataError, EmptyPairs, OutOfVocabulary

from conftest import make_space


# -- naive oracles --------------------------------------------------------

def _cos(a, b):
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(x * x for x in b))
    if na == 0 or nb == 0:
        return 0.0
    return math.fsum(x * y for x, y in zip(a, b)) / (na * nb)


def naive_argmax(space, target, banned):
    best = None
    for w, v in zip(space.words, space.matrix):
        if w in banned:
            continue
        key = (-_cos(target, v), w)
        if best is None or key < best:
            best = key
    return best[1]


def naive_mul(space, x1, y1, x2, eps=1e-3):
    best = None
    for w, v in zip(space.words, space.matrix):
        if w in (x1, y1, x2):
            continue
        s = [(1 + _cos(v, space.vector(t))) / 2 for t in (y1, x2, x1)]
        key = (-(s[0] * s[1] / (s[2] + eps)), w)
        if best is None or key < best:
            best = key
    return best[1]


def naive_root(vectors):
    S = [np.asarray(v, dtype=float) for v in vectors]
    total = [math.fsum(col) for col in zip(*S)]
    n = math.sqrt(math.fsum(x * x for x in total))
    unit = [x / n for x in total]
    v_min = min(math.fsum(a * b for a, b in zip(unit, v)) for v in S)
    return np.array([v_min * u for u in unit])


def naive_answer(space, method, q, X, Y, pairs):
    x1, y1, x2, y2 = q
    V = space.vector
    if method == "vec_of_add":
        return naive_argmax(space, V(y1) - V(x1) + V(x2), {x1, y1, x2})
    if method == "vec_of_mul":
        return naive_mul(space, x1, y1, x2)
    if method == "vec_of_avr":
        ps = [p for p in pairs if p[1] != y2]
        t = np.mean([V(y) - V(x) for x, y in ps], axis=0) + V(x2)
        return naive_argmax(space, t, {x2} | {w for p in ps for w in p})
    Yq = [y for y in Y if y != y2]
    banned = set(X) | set(Yq)
    if method == "ssn_branch":
        return naive_argmax(space, V(x2) - naive_root([V(x) for x in X]) + naive_root([V(y) for y in Yq]), banned)
    betas = [V(x2) - naive_root([V(x2), V(x)]) for x in X if x != x2]
    return naive_argmax(space, naive_root(betas) + naive_root([V(y) for y in Yq]), banned)


def relational_space(rng, n_pairs=5, n_noise=6, dim=12, noise=0.3):
    """Two categories x_i / y_i sharing per-pair specifics, plus filler words."""
    cx = rng.normal(size=dim)
    cx *= 4 / np.linalg.norm(cx)
    cy = rng.normal(size=dim)
    cy *= 4 / np.linalg.norm(cy)
    words, rows = [], []
    for i in range(n_pairs):
        s = rng.normal(size=dim) * noise * 3
        words += [f"x{i}", f"y{i}"]
        rows += [cx + s, cy + s]
    for i in range(n_noise):
        words.append(f"n{i}")
        rows.append(rng.normal(size=dim) * 2)
    return EmbeddingSpace(tuple(words), np.array(rows))


# -- single-question solvers ----------------------------------------------

def test_add_toy_orthonormal():
    s = make_space({"x1": [1, 0, 0], "y1": [1, 1, 0], "x2": [0, 0, 1], "ans": [0, 1, 1], "o": [0, 1, 0]})
    assert vec_of_add(s, "x1", "y1", "x2") == "ans"
    # hand-computed cosines of the target (0,1,1)
    t = add_target(s, "x1", "y1", "x2")
    assert t.tolist() == [0.0, 1.0, 1.0]
    assert _cos(t, s.vector("o")) == pytest.approx(1 / math.sqrt(2))


def test_add_identity_offset():
    s = make_space({"a": [1, 0.5], "b": [0.2, 1], "c": [3, 1]})
    assert vec_of_add(s, "a", "a", "b", exclude_inputs=False) == "b"
    assert vec_of_add(s, "a", "a", "b") == "c"


def test_add_oov():
    s = make_space({"a": [1, 0], "b": [0, 1]})
    with pytest.raises(OutOfVocabulary):
        vec_of_add(s, "a", "b", "zz")


def test_mul_agrees_with_add_on_small_space():
    s = make_space({"man": [1, 0, 0.1], "woman": [1, 1, 0.1], "king": [0.2, 0, 1],
                    "queen": [0.2, 1, 1], "apple": [-1, -0.3, 0.2]})
    assert vec_of_add(s, "man", "woman", "king") == vec_of_mul(s, "man", "woman", "king") == "queen"


def test_mul_antipodal_candidate_never_chosen():
    s = make_space({"x1": [1, 0], "y1": [1, 0.01], "x2": [1, -0.01], "anti": [-1, 0], "z": [0, 1]})
    # anti has cosine ~ -1 to every cue, so its score is ~ 0
    assert vec_of_mul(s, "x1", "y1", "x2") == "z"
    with pytest.raises(ValueError):
        vec_of_mul(s, "x1", "y1", "x2", epsilon=0)


def test_avr_equal_offsets_exact():
    s = make_space({"a": [1.0, 0.0], "b": [1.5, 1.0], "c": [0.0, 1.0], "d": [0.5, 2.0], "e": [2.0, 2.0]})
    o = s.vector("b") - s.vector("a")
    assert np.array_equal(s.vector("d") - s.vector("c"), o)
    assert np.array_equal(avr_target(s, [("a", "b"), ("c", "d")], "e"), s.vector("e") + o)
    with pytest.raises(EmptyPairs):
        vec_of_avr(s, [], "e")


def test_branch_duplicate_support_is_root_y():
    s = make_space({"p": [2.0, 1.0, 0.0], "p2": [2.0, 1.0, 0.0], "q": [0.0, 1.0, 2.0],
                    "r": [0.5, 1.0, 2.5], "t": [1.0, 1.0, 1.0]})
    t = branch_target(s, ["p", "p2"], ["q", "r"], "p")
    assert np.array_equal(t, root([s.vector("q"), s.vector("r")]))
    assert ssn_branch(s, ["p", "p2"], ["q", "r"], "p") == "t"


def test_filter_two_support_closed_form(rng):
    for _ in range(100):
        s = relational_space(rng)
        Y = ["y1", "y2", "y3"]
        t, fell = filter_target(s, ["x0", "x1"], Y, "x0")
        assert not fell
        v = s.vector("x0")
        want = (v - root([v, s.vector("x1")])) + root([s.vector(y) for y in Y])
        assert np.array_equal(t, want)


def test_filter_falls_back_when_degenerate(caplog):
    # the two branches of x2 point apart, so their root is degenerate; root(X) is fine
    s = make_space({"x2": [1.5, 1.5, 2.0], "p": [-1.5, 1.0, 2.0], "q": [2.5, 2.5, 2.5],
                    "y": [0.5, 1.0, 0.0], "w": [1.0, 1.0, 0.0]})
    X, Y = ["x2", "p", "q"], ["y", "w"]
    with caplog.at_level("INFO", logger="subvec.analogy"):
        t, fell = filter_target(s, X, Y, "x2")
    assert fell and np.array_equal(t, branch_target(s, X, Y, "x2"))
    assert "falling back" in caplog.text


def test_filter_beats_branch_with_idiosyncratic_member():
    rng = np.random.default_rng(0)
    dim, wins = 20, 0
    for _ in range(50):
        cx, cy = (rng.normal(size=dim) for _ in range(2))
        cx *= 4 / np.linalg.norm(cx)
        cy *= 4 / np.linalg.norm(cy)
        offsets = [rng.normal(size=dim) * 0.3 for _ in range(5)]
        xs = [cx + sp for sp in offsets]
        ys = [cy + sp for sp in offsets]
        spike = rng.normal(size=dim)
        xs[3] = xs[3] + 10 * spike / np.linalg.norm(spike)
        words = tuple(f"x{i}" for i in range(5)) + tuple(f"y{i}" for i in range(5))
        s = EmbeddingSpace(words, np.array(xs + ys))
        X, Y = list(words[:5]), [f"y{i}" for i in range(1, 5)]
        f, fell = filter_target(s, X, Y, "x0")
        b = branch_target(s, X, Y, "x0")
        gold = s.vector("y0")
        assert not fell
        wins += _cos(f, gold) > _cos(b, gold)
    assert wins == 50


def test_branch_planted_clusters(rng):
    for _ in range(30):
        s = relational_space(rng, noise=0.4)
        X = [f"x{i}" for i in range(5)]
        Y = [f"y{i}" for i in range(5) if i != 2]
        assert ssn_branch(s, X, Y, "x2") == "y2"
        assert ssn_filter(s, X, Y, "x2") == "y2"


# -- oracle equivalence and invariances -----------------------------------

def test_solvers_match_naive_oracle():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(60):
        s = relational_space(rng, n_pairs=5, n_noise=8, dim=6, noise=0.5)
        X = [f"x{i}" for i in range(5)]
        Y = [f"y{i}" for i in range(5)]
        pairs = list(zip(X, Y))
        for j in range(5):
            i = (j + 1) % 5
            q = (X[i], Y[i], X[j], Y[j])
            Yq = [y for y in Y if y != Y[j]]
            ps = [p for p in pairs if p[1] != Y[j]]
            got = {
                "vec_of_add": vec_of_add(s, *q[:3]),
                "vec_of_mul": vec_of_mul(s, *q[:3]),
                "vec_of_avr": vec_of_avr(s, ps, q[2]),
                "ssn_branch": ssn_branch(s, X, Yq, q[2]),
                "ssn_filter": ssn_filter(s, X, Yq, q[2]),
            }
            for m in METHODS:
                assert got[m] == naive_answer(s, m, q, X, Y, pairs), m
                checked += 1
    assert checked == 60 * 5 * 5


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.sampled_from([0.5, 3.0]))
def test_scale_invariance(seed, c):
    s = relational_space(np.random.default_rng(seed), noise=0.5)
    t = EmbeddingSpace(s.words, c * s.matrix)
    X = [f"x{i}" for i in range(5)]
    Yq = [f"y{i}" for i in range(1, 5)]
    ps = [(f"x{i}", f"y{i}") for i in range(1, 5)]

    def outcome(fn, *args):
        try:
            return fn(*args)
        except DataError as exc:
            return type(exc).__name__

    assert vec_of_add(s, "x1", "y1", "x0") == vec_of_add(t, "x1", "y1", "x0")
    assert vec_of_mul(s, "x1", "y1", "x0") == vec_of_mul(t, "x1", "y1", "x0")
    assert vec_of_avr(s, ps, "x0") == vec_of_avr(t, ps, "x0")
    assert outcome(ssn_branch, s, X, Yq, "x0") == outcome(ssn_branch, t, X, Yq, "x0")
    assert outcome(ssn_filter, s, X, Yq, "x0") == outcome(ssn_filter, t, X, Yq, "x0")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_avr_singleton_equals_add(seed):
    r = np.random.default_rng(seed)
    s = EmbeddingSpace(tuple(f"w{i}" for i in range(10)), r.normal(size=(10, 4)))
    a, b, c = (s.words[i] for i in r.choice(10, 3, replace=False))
    assert np.array_equal(avr_target(s, [(a, b)], c), add_target(s, a, b, c))
    assert vec_of_avr(s, [(a, b)], c) == vec_of_add(s, a, b, c)


# -- benchmark ------------------------------------------------------------

def toy_corpus():
    lines = [": rel-one"]
    for i in range(5):
        for j in range(5):
            if i != j:
                lines.append(f"x{i} y{i} x{j} y{j}")
    lines.append(": rel-two")
    lines += ["n0 n1 n2 n3", "n2 n3 n0 n1", "n1 n0 n3 n2"]
    return parse_google_analogy_lines(lines)


@pytest.mark.parametrize("method", METHODS)
def test_benchmark_matches_oracle(method):
    s = relational_space(np.random.default_rng(5), noise=0.6)
    data = toy_corpus()
    rep = run_analogy_benchmark(s, data, method)
    assert rep.coverage == 1.0 and rep.total == len(data.questions)
    for name, pairs in data.sections:
        X = list(dict.fromkeys(x for x, _ in pairs))
        Y = list(dict.fromkeys(y for _, y in pairs))
        correct = 0
        for q in data.questions:
            if q.section != name:
                continue
            qt = (q.x1, q.y1, q.x2, q.y2)
            correct += naive_answer(s, method, qt, X, Y, list(pairs)) == q.y2
        assert rep.sections[name]["correct"] == correct
        assert rep.sections[name]["failed"] == 0
    assert rep.accuracy == rep.correct / rep.answered


def test_benchmark_oov_coverage_and_workers():
    s = relational_space(np.random.default_rng(6), noise=0.6)
    data = parse_google_analogy_lines([": a", "x0 y0 x1 y1", "x0 y0 x1 zz", "x1 y1 x2 y2", ": b", "qq rr ss tt"])
    rep = run_analogy_benchmark(s, data, "vec_of_add")
    assert rep.total == 4 and rep.answered == 2 and rep.coverage == 0.5
    assert rep.sections["b"]["accuracy"] is None
    big = toy_corpus()
    for m in METHODS:
        a = run_analogy_benchmark(s, big, m, workers=1).to_json()
        b = run_analogy_benchmark(s, big, m, workers=4).to_json()
        assert a == b


def test_benchmark_empty_and_unknown():
    s = relational_space(np.random.default_rng(1))
    rep = run_analogy_benchmark(s, AnalogySections(()), "ssn_filter")
    assert rep.coverage == 0.0 and rep.accuracy is None
    assert json.loads(rep.to_json())["overall"]["accuracy"] is None
    with pytest.raises(ValueError):
        run_analogy_benchmark(s, toy_corpus(), "vec_of_div")


def test_benchmark_unanswerable_counts_as_failed():
    s = relational_space(np.random.default_rng(3))
    # one pair per section: no Y words remain once y2 is held out
    data = parse_google_analogy_lines([": solo", "x0 y0 x0 y0"])
    rep = run_analogy_benchmark(s, data, "ssn_branch")
    assert rep.answered == 1 and rep.failed == 1 and rep.correct == 0 and rep.accuracy == 0.0


def test_accuracy_table_layout():
    s = relational_space(np.random.default_rng(8), noise=0.6)
    t = EmbeddingSpace(s.words, s.matrix, source_tag="other")
    data = toy_corpus()
    reps = [run_analogy_benchmark(sp, data, m) for sp in (s, t) for m in METHODS]
    lines = accuracy_table_tsv(reps).splitlines()
    assert lines[0] == "method\t\tother"
    assert [l.split("\t")[0] for l in lines[1:]] == ["VecOfAdd", "VecOfMul", "VecOfAvr", "SSNbranch", "SSNfilter"]
    assert all(len(l.split("\t")) == 3 for l in lines)
