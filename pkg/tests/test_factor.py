import math
from fractions import Fraction

import numpy as np
import pytest

from nlpressure.covers import Cover, cylinder_partition, iterated_join, join
from nlpressure.energy import CylinderFunction, EnergyFunctional, evaluate
from nlpressure.entropy import h_cover_static
from nlpressure.factor import (
    SlidingBlockCode,
    apply,
    factor_pressure_identity,
    identity_code,
    pullback_cover,
    pushforward_measure,
    random_factor_instance,
)
from nlpressure.measures import AtomicMeasure, MarkovMeasure, empirical, word_masses
from nlpressure.subshift import PointRep, Subshift, higher_block, shift

F2 = Subshift.full(2)
REMARK = Subshift.from_matrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
FOUR = Subshift.from_matrix([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]])
COLLAPSE = SlidingBlockCode(FOUR, REMARK, 1, (0, 1, 2, 2))


def sets_of(U):
    r = max(U.resolution, 1)
    return {frozenset(e.lift(r)) for e in U.elements}


def test_identity_code():
    code = identity_code(REMARK)
    x = PointRep((0,), (1, 0))
    assert apply(code, x) == x
    U = Cover.from_words(REMARK, [[(0,), (2,)], [(1,), (2,)]])
    assert sets_of(pullback_cover(code, U)) == sets_of(U)
    mu = AtomicMeasure.dirac(x)
    assert pushforward_measure(code, mu) == mu


def test_higher_block_round_trip():
    B, blocks = higher_block(F2, 2)
    code = SlidingBlockCode(B, F2, 1, tuple(b[0] for b in blocks))
    x = PointRep((1,), (0, 0, 1))
    # recode x as its sequence of 2-blocks
    seq = x.prefix(10)
    idx = {b: i for i, b in enumerate(blocks)}
    y = PointRep(tuple(idx[seq[i:i + 2]] for i in range(1)),
                 tuple(idx[seq[i:i + 2]] for i in range(1, 4)))
    assert apply(code, y) == x


def test_collapse_image_admissible():
    for w in FOUR.words(5):
        assert REMARK.is_admissible(COLLAPSE.image_word(w))
    with pytest.raises(ValueError):
        SlidingBlockCode(F2, REMARK, 1, (0, 2))


def test_apply_commutes_with_shift():
    code = SlidingBlockCode(F2, F2, 2, (0, 1, 1, 0))
    for x in F2.periodic_points(2, 3):
        assert apply(code, shift(x)) == shift(apply(code, x))


def test_pullback_partition_and_join():
    alpha = cylinder_partition(REMARK, 1)
    assert pullback_cover(COLLAPSE, alpha).is_partition()
    U = Cover.from_words(REMARK, [[(0,), (2,)], [(1,), (2,)]])
    V = Cover.from_words(REMARK, [[(0,), (1,)], [(2,)]])
    left = pullback_cover(COLLAPSE, join(U, V))
    right = join(pullback_cover(COLLAPSE, U), pullback_cover(COLLAPSE, V))
    assert sets_of(left) == sets_of(right)


def test_empirical_pushforward():
    code = SlidingBlockCode(F2, F2, 2, (0, 1, 1, 0))
    for y in F2.periodic_points(1, 3):
        for n in (1, 2, 5):
            assert pushforward_measure(code, empirical(y, n)) == empirical(apply(code, y), n)


def test_markov_pushforward_stays_invariant():
    mu = MarkovMeasure(F2, [[0.7, 0.3], [0.2, 0.8]])
    code = SlidingBlockCode(F2, F2, 2, (0, 1, 1, 0))
    img = pushforward_measure(code, mu, depth=5)
    assert img.lossy
    m = np.array(img.masses)
    assert m.sum() == pytest.approx(1, abs=1e-12)
    # marginals of the first 4 and the last 4 symbols agree
    first = m.reshape(-1, 2).sum(axis=1)
    last = m.reshape(2, -1).sum(axis=0)
    assert np.allclose(first, last, atol=1e-12)
    swap = SlidingBlockCode(F2, F2, 1, (1, 0))
    img = pushforward_measure(swap, mu)
    assert np.allclose(word_masses(img, 2), word_masses(mu, 2)[::-1])


def test_cover_entropy_preserved_on_atomic_measures():
    U = Cover.from_words(REMARK, [[(0,), (2,)], [(1,), (2,)]])
    nu = AtomicMeasure([(PointRep((), (0, 1)), Fraction(1, 3)), (PointRep((3,), (2,)), Fraction(1, 3)),
                        (PointRep((1,), (0,)), Fraction(1, 3))])
    img = pushforward_measure(COLLAPSE, nu)
    for n in (1, 2, 3):
        up = h_cover_static(nu, iterated_join(FOUR, pullback_cover(COLLAPSE, U), n))
        down = h_cover_static(img, iterated_join(REMARK, U, n))
        assert up == pytest.approx(down, abs=1e-12)


def test_energy_composition():
    f = CylinderFunction.symbols(REMARK, [Fraction(1), Fraction(-1), Fraction(10)])
    E = EnergyFunctional.composite((0, 1, Fraction(1, 2)), f)
    from nlpressure.factor import composed_energy

    F = composed_energy(COLLAPSE, E)
    for y in FOUR.periodic_points(1, 2):
        mu = empirical(y, 3)
        assert evaluate(F, mu) == evaluate(E, pushforward_measure(COLLAPSE, mu))


def test_identity_pressure_examples():
    a, b = Fraction(1), Fraction(-1, 2)
    E = EnergyFunctional.linear(CylinderFunction.symbols(F2, [a, b]))
    alpha = cylinder_partition(F2, 1)
    rep = factor_pressure_identity(identity_code(F2), alpha, E, [1, 2, 3], exact=True)
    assert rep["passed"]
    B, blocks = higher_block(F2, 2)
    code = SlidingBlockCode(B, F2, 1, tuple(bl[0] for bl in blocks))
    rep = factor_pressure_identity(code, alpha, E, [1, 2, 3, 4], exact=True)
    assert rep["passed"]
    for row in rep["rows"]:
        assert row["target"] == pytest.approx(row["n"] * math.log(math.exp(1) + math.exp(-0.5)), rel=1e-12)


def test_collapse_onto_remark_identity():
    U = Cover.from_words(REMARK, [[(0,), (2,)], [(1,), (2,)]])
    E = EnergyFunctional.linear(CylinderFunction.symbols(REMARK, [0, 0, 10]))
    rep = factor_pressure_identity(COLLAPSE, U, E, range(1, 5), exact=True)
    assert rep["passed"] and rep["first_failure"] is None


@pytest.mark.parametrize("seed", range(8))
def test_random_factor_instances(seed):
    code, U, E = random_factor_instance(seed)
    assert factor_pressure_identity(code, U, E, [1, 2, 3], exact=True)["passed"]
    assert factor_pressure_identity(code, U, E, [1, 2])["passed"]
