import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlpressure.covers import Cover, CylSet, cylinder_partition, is_finer, join, minimal_subcover_count, preimage
from nlpressure.entropy import (
    h_cover_join,
    h_cover_static,
    h_plus,
    h_rate,
    h_rate_cover,
    htop_cover,
    logsum_bound,
    shannon,
)
from nlpressure.measures import AtomicMeasure, MarkovMeasure, bernoulli, pushforward
from nlpressure.subshift import PointRep, Subshift

from .strategies import covers, points, systems

F2 = Subshift.full(2)
GOLDEN = Subshift.forbidding(2, [(1, 1)])
REMARK = Subshift.from_matrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
REMARK_U = Cover.from_words(REMARK, [[(0,), (2,)], [(1,), (2,)]])
FIXED = AtomicMeasure.dirac(PointRep((), (2,)))
HALF = MarkovMeasure(REMARK, [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]], [0.5, 0.5, 0])
PHI = (1 + math.sqrt(5)) / 2
LOG2 = math.log(2)


def test_shannon_examples():
    p4 = cylinder_partition(F2, 2)
    assert shannon(bernoulli(F2, [0.5, 0.5]), p4) == pytest.approx(math.log(4), abs=1e-14)
    p = 0.3
    assert shannon(bernoulli(F2, [p, 1 - p]), cylinder_partition(F2, 1)) == pytest.approx(
        -p * math.log(p) - (1 - p) * math.log(1 - p), abs=1e-14)
    assert shannon(FIXED, cylinder_partition(REMARK, 2)) == 0


def test_static_cover_entropy_examples():
    alpha = cylinder_partition(F2, 2)
    mu = bernoulli(F2, [0.2, 0.8])
    assert h_cover_static(mu, alpha) == pytest.approx(shannon(mu, alpha), abs=1e-14)
    assert h_cover_static(FIXED, REMARK_U) == 0
    assert h_cover_static(HALF, REMARK_U) == pytest.approx(LOG2, abs=1e-14)


def test_h_rate_examples():
    est = h_rate(bernoulli(F2, [0.5, 0.5]), cylinder_partition(F2, 1), 6)
    assert all(v == pytest.approx(LOG2, abs=1e-13) for _, v in est.per_n)
    assert est.closed_form == pytest.approx(LOG2, abs=1e-15)
    A = np.array([[1.0, 1.0], [1.0, 0.0]])
    v = np.array([PHI, 1.0])
    parry = MarkovMeasure(GOLDEN, A * v[None, :] / (PHI * v[:, None]))
    est = h_rate(parry, cylinder_partition(GOLDEN, 1), 8)
    assert est.closed_form == pytest.approx(math.log(PHI), abs=1e-12)
    assert est.monotone_flag and est.final >= est.closed_form - 1e-12
    fixed_chain = MarkovMeasure(REMARK, [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]], [0, 0, 1])
    assert h_rate(fixed_chain, cylinder_partition(REMARK, 1), 4).final == pytest.approx(0, abs=1e-15)


def test_h_rate_markov_monotone_matches_closed_form_in_the_limit():
    mu = MarkovMeasure(F2, [[0.9, 0.1], [0.4, 0.6]])
    est = h_rate(mu, cylinder_partition(F2, 1), 10)
    vals = [v for _, v in est.per_n]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    # H_n = H_1 + (n-1) h for a Markov chain
    h = est.closed_form
    H1 = vals[0]
    for n, v in est.per_n:
        assert v == pytest.approx((H1 + (n - 1) * h) / n, abs=1e-12)


def test_h_rate_cover_examples():
    mu = bernoulli(F2, [0.3, 0.7])
    alpha = cylinder_partition(F2, 1)
    a = h_rate(mu, alpha, 4)
    b = h_rate_cover(mu, alpha, 4)
    assert [v for _, v in a.per_n] == pytest.approx([v for _, v in b.per_n], abs=1e-13)
    est = h_rate_cover(HALF, REMARK_U, 5)
    assert all(v == pytest.approx(LOG2, abs=1e-13) for _, v in est.per_n)
    whole = Cover(F2, (CylSet.whole(F2),))
    assert h_rate_cover(mu, whole, 3).final == 0


def test_h_plus_examples():
    mu = bernoulli(F2, [0.3, 0.7])
    alpha = cylinder_partition(F2, 1)
    assert h_plus(mu, alpha, 4) == pytest.approx(h_rate(mu, alpha, 4).final, abs=1e-13)
    fixed_chain = MarkovMeasure(REMARK, [[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]], [0, 0, 1])
    assert h_plus(fixed_chain, REMARK_U, 3) == pytest.approx(0, abs=1e-15)
    assert h_plus(HALF, REMARK_U, 4) >= h_rate_cover(HALF, REMARK_U, 4).final - 1e-12


def test_htop_examples():
    est = htop_cover(F2, cylinder_partition(F2, 1), 6)
    assert all(v == pytest.approx(LOG2, abs=1e-14) for _, v in est.per_n)
    est = htop_cover(GOLDEN, cylinder_partition(GOLDEN, 1), 10)
    fib = [len(GOLDEN.words(n)) for n in range(1, 11)]
    assert [v for _, v in est.per_n] == pytest.approx([math.log(c) / n for n, c in zip(range(1, 11), fib)], abs=1e-13)
    assert est.monotone_flag
    assert htop_cover(F2, Cover(F2, (CylSet.whole(F2),)), 3).final == 0


def test_logsum_examples():
    lhs, rhs, g = logsum_bound(np.zeros(4), np.full(4, 0.25))
    assert lhs == pytest.approx(math.log(4), abs=1e-15) and rhs == pytest.approx(math.log(4), abs=1e-15)
    a = np.array([0.3, -1.0, 2.5])
    _, _, g = logsum_bound(a, np.full(3, 1 / 3))
    lhs, rhs, _ = logsum_bound(a, g)
    assert abs(lhs - rhs) <= 1e-12
    lhs, rhs, _ = logsum_bound(a, np.array([0.5, 0.25, 0.25]))
    assert lhs < rhs
    with pytest.raises(ValueError):
        logsum_bound(a, np.array([0.5, 0.5, 0.5]))


@st.composite
def atomic(draw, system):
    pts = draw(st.lists(points(system), min_size=1, max_size=5))
    raw = draw(st.lists(st.integers(1, 5), min_size=len(pts), max_size=len(pts)))
    return AtomicMeasure([(p, Fraction(r, sum(raw))) for p, r in zip(pts, raw)])


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_static_entropy_bounds(data):
    S = data.draw(systems())
    U = data.draw(covers(S))
    mu = data.draw(atomic(S))
    h = h_cover_static(mu, U)
    assert -1e-15 <= h <= math.log(minimal_subcover_count(U)) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_static_entropy_monotone_and_subadditive(data):
    S = data.draw(systems())
    U, V = data.draw(covers(S)), data.draw(covers(S))
    mu = data.draw(atomic(S))
    W = join(U, V)
    assert is_finer(W, U)
    assert h_cover_static(mu, W) >= h_cover_static(mu, U) - 1e-12
    assert h_cover_static(mu, W) <= h_cover_static(mu, U) + h_cover_static(mu, V) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_static_entropy_preimage(data):
    S = data.draw(systems())
    U = data.draw(covers(S))
    mu = data.draw(atomic(S))
    pre = Cover(S, tuple(preimage(e, 1) for e in U.elements))
    assert h_cover_static(mu, pre) <= h_cover_static(pushforward(mu), U) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.data(), st.integers(1, 3))
def test_join_entropy_matches_static(data, n):
    from nlpressure.covers import iterated_join

    S = data.draw(systems())
    U = data.draw(covers(S))
    k = S.alphabet_size
    P = np.array(data.draw(st.lists(st.lists(st.floats(0.1, 1), min_size=k, max_size=k), min_size=k, max_size=k)))
    P = P * S.matrix
    P = P / P.sum(axis=1, keepdims=True)
    mu = MarkovMeasure(S, P)
    assert h_cover_join(mu, S, U, n) == pytest.approx(h_cover_static(mu, iterated_join(S, U, n)), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=10), st.data())
def test_logsum_inequality(a, data):
    raw = np.array(data.draw(st.lists(st.floats(0, 1), min_size=len(a), max_size=len(a))))
    if raw.sum() <= 0:
        raw = np.ones(len(a))
    b = raw / raw.sum()
    lhs, rhs, g = logsum_bound(a, b)
    assert lhs <= rhs + 1e-12
    lg, rg, _ = logsum_bound(a, g)
    assert abs(lg - rg) <= 1e-12
