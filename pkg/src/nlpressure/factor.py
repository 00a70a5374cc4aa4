"""Sliding block codes between subshifts and the factor-map identities."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .covers import Cover, CylSet
from .energy import CylinderFunction, EnergyFunctional, compose
from .logexp import ExpSum
from .measures import AtomicMeasure, CylinderMarginal, MarkovMeasure, word_masses
from .subshift import PointRep, Subshift, higher_block, word_array

__all__ = [
    "SlidingBlockCode",
    "apply",
    "pullback_cover",
    "pushforward_measure",
    "composed_energy",
    "factor_pressure_identity",
    "random_factor_instance",
    "identity_code",
]


@dataclass(frozen=True)
class SlidingBlockCode:
    """``(pi x)_i = block_map[x_i ... x_{i+window-1}]``.

    ``block_map`` is aligned with the admissible source words of length
    ``window`` in lexicographic order.  Construction checks that images of
    ``window + 1``-words are admissible and, when ``check_length > 0``, that
    every target word up to that length has a preimage.
    """

    source: Subshift
    target: Subshift
    window: int
    block_map: tuple
    check_length: int = 4

    def __post_init__(self):
        words = self.source.words(self.window)
        bm = tuple(int(b) for b in self.block_map)
        object.__setattr__(self, "block_map", bm)
        if len(bm) != len(words):
            raise ValueError(f"block map has {len(bm)} entries, expected {len(words)}")
        if any(not (0 <= b < self.target.alphabet_size) for b in bm):
            raise ValueError("block map leaves the target alphabet")
        for w in self.source.words(self.window + 1):
            img = self.image_word(w)
            if not self.target.is_admissible(img):
                raise ValueError(f"image {img} of {w} is not admissible in the target")
        self.surjectivity_gaps()

    def _table(self) -> dict:
        return {w: b for w, b in zip(self.source.words(self.window), self.block_map)}

    def image_word(self, word: Sequence[int]) -> tuple:
        table = _table_cache(self)
        word = tuple(word)
        return tuple(table[word[i:i + self.window]] for i in range(len(word) - self.window + 1))

    def surjectivity_gaps(self) -> list:
        """Target words (length <= check_length) with no preimage; raises if any."""
        for L in range(1, self.check_length + 1):
            images = {self.image_word(w) for w in self.source.words(L + self.window - 1)}
            missing = [w for w in self.target.words(L) if w not in images]
            if missing:
                raise ValueError(f"code is not onto: target word {missing[0]} has no preimage")
        return []

    def is_relabeling(self) -> bool:
        return (self.window == 1 and len(set(self.block_map)) == len(self.block_map)
                and self.source.alphabet_size == self.target.alphabet_size)


_TABLES: dict = {}


def _table_cache(code: SlidingBlockCode) -> dict:
    t = _TABLES.get(code)
    if t is None:
        t = code._table()
        _TABLES[code] = t
    return t


def identity_code(system: Subshift) -> SlidingBlockCode:
    return SlidingBlockCode(system, system, 1, tuple(range(system.alphabet_size)))


def apply(code: SlidingBlockCode, x: PointRep) -> PointRep:
    """Image of an eventually periodic point."""
    p, c = len(x.preperiod), len(x.cycle)
    ys = code.image_word(x.prefix(p + c + code.window - 1))
    return PointRep(ys[:p], ys[p:p + c])


def pullback_cover(code: SlidingBlockCode, U: Cover) -> Cover:
    """``pi^{-1} U``, element by element (labels kept)."""
    r = max(U.resolution, 1)
    L = r + code.window - 1
    src_words = code.source.words(L)
    images = [code.image_word(w) for w in src_words]
    elements = []
    for e in U.elements:
        target_words = e.lift(r)
        ws = frozenset(w for w, img in zip(src_words, images) if img in target_words)
        elements.append(CylSet(code.source, L, ws))
    return Cover(code.source, tuple(elements), U.labels)


def pushforward_measure(code: SlidingBlockCode, mu, depth: int = 6):
    """``pi_* mu``.

    Atomic measures map atom by atom.  A Markov measure pushed through a
    relabeling stays Markov; through any other code its image is returned as
    the masses of target words of length ``depth`` with ``lossy=True``.
    """
    if isinstance(mu, AtomicMeasure):
        return AtomicMeasure([(apply(code, x), w) for x, w in mu.atoms])
    if isinstance(mu, MarkovMeasure):
        if code.is_relabeling():
            perm = np.array(code.block_map)
            k = code.target.alphabet_size
            P = np.zeros((k, k))
            pi = np.zeros(k)
            P[np.ix_(perm, perm)] = mu.transition
            pi[perm] = mu.stationary
            return MarkovMeasure(code.target, P, pi)
        L = depth + code.window - 1
        src = word_array(code.source, L)
        masses = word_masses(mu, L)
        tgt = code.target.words(depth)
        index = {w: i for i, w in enumerate(tgt)}
        out = np.zeros(len(tgt))
        for row, m in zip(src, masses):
            out[index[code.image_word(tuple(int(s) for s in row))]] += m
        return CylinderMarginal(code.target, depth, tuple(out.tolist()), lossy=True)
    raise TypeError(f"unsupported measure {type(mu).__name__}")


def composed_energy(code: SlidingBlockCode, E: EnergyFunctional) -> EnergyFunctional:
    """``E o pi_*`` as an energy on the source system."""
    return compose(E, code)


def factor_pressure_identity(code: SlidingBlockCode, U: Cover, E: EnergyFunctional,
                             n_range: Sequence[int], exact: bool = False,
                             cap: int | None = None, tol: float = 1e-9) -> dict:
    """Compare ``p1`` upstairs (pulled-back cover and energy) with ``p1`` downstairs."""
    from .pressure import AtomTable

    V = pullback_cover(code, U)
    F = composed_energy(code, E)
    rows = []
    first_failure = None
    for n in n_range:
        up = AtomTable(code.source, V, F, n, exact, cap).p1()
        down = AtomTable(code.target, U, E, n, exact, cap).p1()
        if isinstance(up, ExpSum):
            ok = up == down
            row = {"n": n, "source": up.log(), "target": down.log(), "exact_equal": ok,
                   "source_exact": up.to_str(), "target_exact": down.to_str()}
        else:
            ok = abs(up - down) <= tol * max(1.0, abs(down))
            row = {"n": n, "source": up, "target": down}
        row["passed"] = bool(ok)
        rows.append(row)
        if not ok and first_failure is None:
            first_failure = n
    return {"rows": rows, "passed": first_failure is None, "first_failure": first_failure,
            "surjectivity_checked_to": code.check_length}


# random instances ----------------------------------------------------------

REMARK = Subshift.from_matrix([[1, 1, 0], [1, 1, 0], [0, 0, 1]])


def _random_sft(rng: random.Random, k: int) -> Subshift:
    while True:
        rows = [[rng.random() < 0.7 for _ in range(k)] for _ in range(k)]
        try:
            return Subshift(k, tuple(tuple(r) for r in rows))
        except ValueError:
            continue


def _random_cover(rng: random.Random, system: Subshift, size: int = 2, r: int = 1) -> Cover:
    words = system.words(r)
    while True:
        elements = []
        for _ in range(size):
            ws = [w for w in words if rng.random() < 0.55]
            if ws:
                elements.append(ws)
        covered = {w for ws in elements for w in ws}
        missing = [w for w in words if w not in covered]
        if missing and elements:
            elements[rng.randrange(len(elements))].extend(missing)
        if elements:
            return Cover.from_words(system, elements)


def _random_energy(rng: random.Random, system: Subshift, window: int = 1) -> EnergyFunctional:
    table = tuple(Fraction(rng.randint(-4, 4), rng.choice([1, 2, 4])) for _ in system.words(window))
    f = CylinderFunction(system, window, table)
    if rng.random() < 0.5:
        return EnergyFunctional.linear(f)
    coeffs = (Fraction(rng.randint(-2, 2), 2), Fraction(rng.randint(-2, 2), 2), Fraction(rng.randint(0, 2), 2))
    return EnergyFunctional.composite(coeffs, f)


def _product_extension(target: Subshift, m: int) -> SlidingBlockCode:
    k = target.alphabet_size
    pairs = [(a, i) for a in range(k) for i in range(m)]
    rows = tuple(tuple(target.allowed[a][b] for b, _ in pairs) for a, _ in pairs)
    source = Subshift(len(pairs), rows)
    return SlidingBlockCode(source, target, 1, tuple(a for a, _ in pairs))


def _relabeling(target: Subshift, rng: random.Random) -> SlidingBlockCode:
    k = target.alphabet_size
    perm = list(range(k))
    rng.shuffle(perm)
    inv = [0] * k
    for i, p in enumerate(perm):
        inv[p] = i
    # source symbol s stands for target symbol inv[s]
    rows = tuple(tuple(target.allowed[inv[s]][inv[t]] for t in range(k)) for s in range(k))
    return SlidingBlockCode(Subshift(k, rows), target, 1, tuple(inv))


def _higher_block_code(target: Subshift, block: int) -> SlidingBlockCode:
    source, blocks = higher_block(target, block)
    return SlidingBlockCode(source, target, 1, tuple(b[0] for b in blocks))


def _collapse_onto_remark() -> SlidingBlockCode:
    # symbols 2 and 3 both map to the isolated fixed point of the target
    source = Subshift.from_matrix([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]])
    return SlidingBlockCode(source, REMARK, 1, (0, 1, 2, 2))


def random_factor_instance(seed: int) -> tuple:
    """``(code, cover, energy)`` drawn from four factor families, chosen by ``seed``."""
    rng = random.Random(seed)
    kind = seed % 4
    if kind == 3:
        code = _collapse_onto_remark()
    else:
        target = _random_sft(rng, rng.choice([2, 3]))
        if kind == 0:
            code = _higher_block_code(target, 2)
        elif kind == 1:
            code = _product_extension(target, 2)
        else:
            code = _relabeling(target, rng)
    target = code.target
    U = _random_cover(rng, target, size=rng.choice([2, 3]), r=rng.choice([1, 2]))
    E = _random_energy(rng, target, window=rng.choice([1, 2]))
    return code, U, E
