import itertools
import math
from fractions import Fraction

import mpmath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlpressure.logexp import ExpSum
from nlpressure import search
from nlpressure.search import min_entropy_assignment, min_weighted_set_cover

from . import _oracles as ora


def test_set_cover_small():
    masks = [0b0011, 0b0110, 0b1100, 0b1111]
    assert min_weighted_set_cover(masks, [1, 1, 1, 2.5], 0b1111) == [0, 2]
    assert min_weighted_set_cover(masks, [1, 1, 1, 1.5], 0b1111) == [3]


def test_set_cover_uncoverable():
    with pytest.raises(ValueError):
        min_weighted_set_cover([0b01], [1.0], 0b11)


@st.composite
def set_systems(draw):
    n_items = draw(st.integers(1, 8))
    universe = (1 << n_items) - 1
    masks = draw(st.lists(st.integers(1, universe), min_size=1, max_size=9))
    for it in range(n_items):
        if not any(m >> it & 1 for m in masks):
            masks.append(1 << it)
    costs = draw(st.lists(st.floats(0.05, 10), min_size=len(masks), max_size=len(masks)))
    return masks, costs, universe


@settings(max_examples=200, deadline=None)
@given(set_systems())
def test_set_cover_matches_exhaustive(case):
    masks, costs, universe = case
    got = min_weighted_set_cover(masks, costs, universe)
    cov = 0
    for s in got:
        cov |= masks[s]
    assert cov & universe == universe
    best, _ = ora.set_cover(masks, costs, universe)
    assert sum(costs[s] for s in got) == pytest.approx(best, rel=1e-9)


LEVELS = [0, Fraction(1, 3), Fraction(-1, 2), 30, Fraction(91, 3)]


@st.composite
def exact_set_systems(draw):
    masks, _, universe = draw(set_systems())
    keys = draw(st.lists(st.integers(0, len(LEVELS) - 1), min_size=len(masks), max_size=len(masks)))
    return masks, keys, universe


def _exact_value(keys, chosen):
    with mpmath.workdps(60):
        return mpmath.fsum(mpmath.exp(mpmath.mpf(Fraction(LEVELS[keys[s]]).numerator) / Fraction(LEVELS[keys[s]]).denominator)
                           for s in chosen)


@settings(max_examples=200, deadline=None)
@given(exact_set_systems())
def test_set_cover_exact_near_ties(case):
    # costs far apart in size make float totals tie while exact totals differ
    _check_exact_cover(*case)


@settings(max_examples=200, deadline=None)
@given(exact_set_systems())
def test_set_cover_exact_with_lp_everywhere(case):
    old = search.LP_ITEMS
    search.LP_ITEMS = 1
    try:
        _check_exact_cover(*case)
    finally:
        search.LP_ITEMS = old


def _check_exact_cover(masks, keys, universe):
    top = max(LEVELS[k] for k in keys)
    costs = [math.exp(float(LEVELS[k]) - float(top)) for k in keys]
    ranked = sorted(range(len(LEVELS)), key=lambda i: LEVELS[i])
    rank_keys = [ranked.index(k) for k in keys]

    def exact(counts):
        return ExpSum({LEVELS[ranked[r]] - top: c for r, c in counts.items()})

    got = min_weighted_set_cover(masks, costs, universe, keys=rank_keys, exact=exact)
    cov = 0
    for s in got:
        cov |= masks[s]
    assert cov & universe == universe
    best = None
    for r in range(1, len(masks) + 1):
        for combo in itertools.combinations(range(len(masks)), r):
            c = 0
            for s in combo:
                c |= masks[s]
            if c & universe == universe:
                v = _exact_value(keys, combo)
                best = v if best is None or v < best else best
    with mpmath.workdps(60):
        assert abs(_exact_value(keys, got) - best) <= best * mpmath.mpf(10) ** -50


@st.composite
def assignment_problems(draw):
    n = draw(st.integers(1, 6))
    n_groups = draw(st.integers(1, 4))
    weights = draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
    candidates = [sorted(draw(st.sets(st.integers(0, n_groups - 1), min_size=1))) for _ in range(n)]
    return weights, candidates


def _entropy_brute(masses, candidates):
    best = math.inf
    for choice in itertools.product(*candidates):
        cls = {}
        for m, g in zip(masses, choice):
            cls[g] = cls.get(g, 0.0) + m
        best = min(best, -sum(v * math.log(v) for v in cls.values() if v > 0))
    return best


@settings(max_examples=150, deadline=None)
@given(assignment_problems(), st.data())
def test_entropy_assignment_matches_exhaustive(case, data):
    _, candidates = case
    raw = data.draw(st.lists(st.integers(0, 9), min_size=len(candidates), max_size=len(candidates)))
    if sum(raw) == 0:
        raw[0] = 1
    masses = [r / sum(raw) for r in raw]
    val, assign = min_entropy_assignment(masses, candidates)
    assert all(assign[i] in candidates[i] for i in assign)
    assert val == pytest.approx(_entropy_brute(masses, candidates), abs=1e-12)
