"""Random small instances as raw data, plus converters into package objects."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from nlpressure.covers import Cover
from nlpressure.energy import CylinderFunction, EnergyFunctional
from nlpressure.subshift import Subshift

from . import _oracles as ora


def _surjective(rows):
    # every symbol needs a successor and a predecessor
    return all(any(r) for r in rows) and all(any(c) for c in zip(*rows))


def random_matrix(rng, k):
    while True:
        rows = [[int(rng.random() < 0.65) for _ in range(k)] for _ in range(k)]
        if _surjective(rows):
            return rows


def random_cover(rng, matrix, r, size):
    ws = ora.words(matrix, r)
    while True:
        elems = [[w for w in ws if rng.random() < 0.5] for _ in range(size)]
        elems = [e for e in elems if e]
        if not elems:
            continue
        covered = {w for e in elems for w in e}
        for w in ws:
            if w not in covered:
                rng.choice(elems).append(w)
        # a member equal to the whole space makes every sum trivial
        if any(len(set(e)) == len(ws) for e in elems) and rng.random() < 0.8:
            continue
        return [sorted(set(e)) for e in elems]


def random_energy(rng, matrix, window):
    table = {w: Fraction(rng.randint(-6, 6), rng.choice([1, 2, 3])) for w in ora.words(matrix, window)}
    kind = rng.random()
    if kind < 0.4:
        coeffs = [0, 1]
    elif kind < 0.8:
        coeffs = [Fraction(rng.randint(-2, 2), 2), Fraction(rng.randint(-2, 2), 2),
                  Fraction(rng.randint(-3, 3), 2)]
    else:
        coeffs = [0, Fraction(rng.randint(-2, 2), 2), 0, Fraction(rng.randint(-1, 1), 3)]
    return [(coeffs, window, table)]


def random_instance(seed, max_symbols=3, max_r=2, max_window=2, max_size=3):
    rng = random.Random(seed)
    k = rng.randint(2, max_symbols)
    matrix = random_matrix(rng, k)
    r = rng.randint(1, max_r)
    cover = random_cover(rng, matrix, r, rng.randint(2, max_size))
    energy = random_energy(rng, matrix, rng.randint(1, max_window))
    return matrix, cover, energy


def system_of(matrix):
    return Subshift.from_matrix(matrix)


def cover_of(system, cover):
    return Cover.from_words(system, cover)


def energy_of(system, energy):
    terms = []
    for coeffs, window, table in energy:
        f = CylinderFunction.from_mapping(system, window, table)
        terms.append((tuple(Fraction(c) for c in coeffs), f))
    return EnergyFunctional(tuple(terms))


def build(matrix, cover, energy):
    S = system_of(matrix)
    return S, cover_of(S, cover), energy_of(S, energy)


def all_matrices(k, up_to_relabeling=True):
    """Every 0/1 matrix on ``k`` symbols with no zero row or column.

    By default only one matrix per relabeling class is kept.
    """
    seen = set()
    out = []
    for bits in itertools.product([0, 1], repeat=k * k):
        rows = [list(bits[i * k:(i + 1) * k]) for i in range(k)]
        if not _surjective(rows):
            continue
        if not up_to_relabeling:
            out.append(rows)
            continue
        canon = min(tuple(rows[p[i]][p[j]] for i in range(k) for j in range(k))
                    for p in itertools.permutations(range(k)))
        if canon in seen:
            continue
        seen.add(canon)
        out.append(rows)
    return out
