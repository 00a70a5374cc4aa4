import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlpressure.covers import (
    Cover,
    CylSet,
    JoinAtoms,
    Partition,
    ResolutionCapExceeded,
    assignment_count,
    atom_homes,
    cylinder_partition,
    diam_and_lebesgue,
    enumerate_assignments,
    generated_partition,
    is_finer,
    iterated_join,
    join,
    minimal_subcover_count,
    preimage,
)
from nlpressure.subshift import Subshift

from . import _oracles as ora
from .strategies import covers, systems

F2 = Subshift.full(2)
REMARK = Subshift.from_matrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])


def C(system, elements):
    return Cover.from_words(system, [[tuple(int(c) for c in w) for w in e] for e in elements])


def sets_of(U):
    return {frozenset(e.lift(U.resolution)) for e in U.elements}


REMARK_U = C(REMARK, [["0", "2"], ["1", "2"]])


def test_canonical_cylsets():
    a = CylSet(F2, 2, frozenset([(0, 0), (0, 1)]))
    assert a.resolution == 1 and a.words == frozenset([(0,)])
    assert CylSet.of(F2, [(0,), (1,)]) == CylSet.whole(F2)
    assert CylSet.of(F2, [(0,), (0, 1)]) == CylSet.of(F2, [(0,)])


def test_cover_must_cover():
    with pytest.raises(ValueError, match="not a cover"):
        C(F2, [["0"]])
    with pytest.raises(ValueError):
        Partition(F2, (CylSet.whole(F2), CylSet.of(F2, [(0,)])))


def test_is_finer_examples():
    p1, p2 = cylinder_partition(F2, 1), cylinder_partition(F2, 2)
    assert is_finer(p1, p1)
    assert is_finer(p2, p1)
    assert not is_finer(p1, p2)


def test_join_examples():
    p1 = cylinder_partition(F2, 1)
    j = join(p1, Cover(F2, tuple(preimage(e, 1) for e in p1.elements)))
    assert sets_of(j) == sets_of(cylinder_partition(F2, 2))
    assert sets_of(join(p1, p1)) == sets_of(p1)
    got = {str(e) for e in join(REMARK_U, REMARK_U).elements}
    assert got == {"[0]|[2]", "[1]|[2]", "[2]"}


def test_iterated_join_examples():
    p1 = cylinder_partition(F2, 1)
    J = iterated_join(F2, p1, 3)
    assert len(J) == 8 and sets_of(J) == sets_of(cylinder_partition(F2, 3))
    R = iterated_join(REMARK, REMARK_U, 2)
    assert len(R) == 4
    for c, e in zip(R.labels, R.elements):
        assert e.lift(2) == frozenset([c, (2, 2)])
    assert sets_of(iterated_join(REMARK, REMARK_U, 1)) == sets_of(REMARK_U)


def test_generated_partition_examples():
    p1 = cylinder_partition(F2, 1)
    assert sets_of(generated_partition(p1)) == sets_of(p1)
    assert {str(a) for a in generated_partition(REMARK_U).elements} == {"[0]", "[1]", "[2]"}
    V = Cover(F2, (CylSet.whole(F2), CylSet.of(F2, [(0,)])))
    assert {str(a) for a in generated_partition(V).elements} == {"[0]", "[1]"}


def test_assignment_examples():
    p1 = cylinder_partition(F2, 1)
    got = list(enumerate_assignments(p1))
    assert len(got) == 1 and sets_of(got[0]) == sets_of(p1)
    assert assignment_count(REMARK_U) == 2 == len(list(enumerate_assignments(REMARK_U)))
    V = C(F2, [["0", "1"], ["1"]])
    assert len(list(enumerate_assignments(V))) == 2


def test_subcover_count_examples():
    assert minimal_subcover_count(cylinder_partition(REMARK, 2)) == 5
    p1 = cylinder_partition(F2, 1)
    for n in range(1, 5):
        assert minimal_subcover_count(iterated_join(F2, p1, n)) == 2**n
        assert minimal_subcover_count(iterated_join(REMARK, REMARK_U, n)) == 2**n
        assert ora.cover_number([[1, 1, 0], [1, 1, 0], [0, 0, 1]], [[(0,), (2,)], [(1,), (2,)]], n) == 2**n


def test_diam_lebesgue_examples():
    assert diam_and_lebesgue(cylinder_partition(F2, 1)) == (Fraction(1, 2), Fraction(1, 2))
    assert diam_and_lebesgue(Cover(F2, (CylSet.whole(F2),))) == (1, 1)
    for r in (2, 3):
        assert diam_and_lebesgue(cylinder_partition(F2, r)) == (Fraction(1, 2**r), Fraction(1, 2**r))


def test_remark_diameter_of_fixed_point():
    d, leb = diam_and_lebesgue(REMARK_U)
    assert d == 1 and leb == Fraction(1, 2)


def test_join_atoms_matches_generated_partition():
    for n in (1, 2, 3):
        J = JoinAtoms(REMARK, REMARK_U, n)
        ref = generated_partition(iterated_join(REMARK, REMARK_U, n))
        assert J.n_atoms == len(ref)


def test_join_atoms_cap():
    with pytest.raises(ResolutionCapExceeded):
        JoinAtoms(F2, cylinder_partition(F2, 1), 10, cap=5)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_assignments_refine_and_use_atoms(data):
    S = data.draw(systems())
    V = data.draw(covers(S, max_r=2, max_size=3))
    atoms = [a for a, _ in atom_homes(V)]
    r = max(V.resolution, 1)
    count = 0
    for beta in itertools.islice(enumerate_assignments(V), 64):
        count += 1
        assert beta.is_partition() and is_finer(beta, V)
        for cls in beta.elements:
            ws = cls.lift(r)
            assert all(a.lift(r) <= ws or not (a.lift(r) & ws) for a in atoms)
    assert count == min(64, assignment_count(V))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_join_refines_both(data):
    S = data.draw(systems())
    U, V = data.draw(covers(S)), data.draw(covers(S))
    W = join(U, V)
    assert is_finer(W, U) and is_finer(W, V)


@settings(max_examples=30, deadline=None)
@given(st.data(), st.integers(1, 2), st.integers(1, 2))
def test_iterated_join_splits(data, a, b):
    S = data.draw(systems())
    U = data.draw(covers(S, max_r=1))
    left = iterated_join(S, U, a)
    right = Cover(S, tuple(preimage(e, a) for e in iterated_join(S, U, b).elements))
    assert sets_of(join(left, right)) == sets_of(iterated_join(S, U, a + b))


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_finer_covers_are_larger(data):
    S = data.draw(systems())
    V = data.draw(covers(S))
    for beta in itertools.islice(enumerate_assignments(V), 8):
        assert len(beta) >= minimal_subcover_count(V)


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_subcover_count_matches_oracle(data):
    S = data.draw(systems())
    V = data.draw(covers(S, max_r=2, max_size=4))
    rows = [[int(v) for v in r] for r in S.allowed]
    raw = [sorted(e.lift(V.resolution)) for e in V.elements]
    assert minimal_subcover_count(V) == ora.cover_number(rows, raw, 1)
