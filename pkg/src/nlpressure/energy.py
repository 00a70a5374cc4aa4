"""Energies on measures: finite sums of polynomials of cylinder-function integrals.

``E(mu) = sum_j F_j(integral of f_j dmu)`` with ``F_j`` a polynomial and
``f_j`` depending on a window of ``w`` symbols.  For an empirical measure
``n * E(Delta_x^n)`` is a function of the first ``n + w - 1`` symbols of
``x``, which is what makes the pressure sums finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence

import numpy as np

from .measures import AtomicMeasure, CylinderMarginal, MarkovMeasure, word_masses
from .subshift import Subshift, word_array, word_codes

__all__ = [
    "CylinderFunction",
    "EnergyFunctional",
    "Scores",
    "integral",
    "evaluate",
    "modulus_bound",
    "word_scores",
]


def _num(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, Rational):
        return Fraction(v) if not isinstance(v, int) else v
    return float(v)


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


@dataclass(frozen=True)
class CylinderFunction:
    """Function of the first ``window`` symbols, tabulated on admissible words."""

    system: Subshift
    window: int
    table: tuple  # values aligned with word_array(system, window)

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        n_words = len(word_array(self.system, self.window))
        vals = tuple(_num(v) for v in self.table)
        if len(vals) != n_words:
            raise ValueError(f"table has {len(vals)} entries, expected {n_words}")
        object.__setattr__(self, "table", vals)

    @classmethod
    def from_mapping(cls, system: Subshift, window: int, values: Mapping, default=0):
        """Build from ``{word: value}``; shorter words apply to all their extensions."""
        words = system.words(window)
        table = []
        for w in words:
            v = default
            for cut in range(window, 0, -1):
                if w[:cut] in values:
                    v = values[w[:cut]]
                    break
            table.append(v)
        return cls(system, window, tuple(table))

    @classmethod
    def symbols(cls, system: Subshift, values: Sequence) -> "CylinderFunction":
        """Window-1 function with ``f(x) = values[x_0]``."""
        return cls(system, 1, tuple(values[w[0]] for w in system.words(1)))

    @classmethod
    def constant(cls, system: Subshift, c=0) -> "CylinderFunction":
        return cls(system, 1, tuple(c for _ in system.words(1)))

    @classmethod
    def indicator(cls, system: Subshift, word: Sequence[int]) -> "CylinderFunction":
        word = tuple(word)
        return cls.from_mapping(system, len(word), {word: 1}, default=0)

    def is_exact(self) -> bool:
        return all(_is_exact(v) for v in self.table)

    def values(self) -> np.ndarray:
        return np.array([float(v) for v in self.table])

    def lookup(self) -> np.ndarray:
        """Values indexed by base-k word code (NaN at inadmissible codes)."""
        k = self.system.alphabet_size
        out = np.full(k**self.window, np.nan)
        out[word_codes(word_array(self.system, self.window), k)] = self.values()
        return out

    def __call__(self, word) -> float:
        w = tuple(word[i] for i in range(self.window))
        return self.table[self.system.words(self.window).index(w)]

    def value_range(self) -> tuple:
        return min(self.table), max(self.table)

    def extend(self, window: int) -> "CylinderFunction":
        """The same function read through a longer window."""
        if window < self.window:
            raise ValueError("cannot shrink the window")
        index = {w: i for i, w in enumerate(self.system.words(self.window))}
        table = tuple(self.table[index[w[: self.window]]] for w in self.system.words(window))
        return CylinderFunction(self.system, window, table)


def _poly(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class EnergyFunctional:
    """``E(mu) = sum_j poly_j(integral f_j dmu)``, coefficients in ascending order."""

    terms: tuple = ()

    def __post_init__(self):
        terms = []
        for coeffs, f in self.terms:
            coeffs = tuple(_num(c) for c in coeffs)
            if not coeffs:
                coeffs = (0,)
            terms.append((coeffs, f))
        object.__setattr__(self, "terms", tuple(terms))
        systems = {f.system for _, f in terms}
        if len(systems) > 1:
            raise ValueError("all terms must live on the same subshift")

    @classmethod
    def zero(cls) -> "EnergyFunctional":
        return cls(())

    @classmethod
    def linear(cls, f: CylinderFunction, scale=1) -> "EnergyFunctional":
        return cls((((0, scale), f),))

    @classmethod
    def composite(cls, coeffs: Sequence, f: CylinderFunction) -> "EnergyFunctional":
        return cls(((tuple(coeffs), f),))

    def __add__(self, other: "EnergyFunctional") -> "EnergyFunctional":
        return EnergyFunctional(self.terms + other.terms)

    @property
    def window(self) -> int:
        return max((f.window for _, f in self.terms), default=1)

    def is_zero(self) -> bool:
        return all(all(c == 0 for c in coeffs) for coeffs, _ in self.terms)

    def is_exact(self) -> bool:
        return all(
            all(_is_exact(c) for c in coeffs) and f.is_exact() for coeffs, f in self.terms
        )

    def is_linear(self) -> bool:
        return all(len(coeffs) <= 2 for coeffs, _ in self.terms)

    def __call__(self, mu):
        return evaluate(self, mu)


def integral(f: CylinderFunction, mu):
    """``integral f dmu``; exact for atomic measures with exact tables."""
    if isinstance(mu, AtomicMeasure):
        index = {w: i for i, w in enumerate(f.system.words(f.window))}
        acc = 0
        for x, w in mu.atoms:
            acc += w * f.table[index[x.prefix(f.window)]]
        return acc
    if isinstance(mu, (MarkovMeasure, CylinderMarginal)):
        return float(np.dot(word_masses(mu, f.window), f.values()))
    raise TypeError(f"unsupported measure {type(mu).__name__}")


def evaluate(E: EnergyFunctional, mu):
    total = 0
    for coeffs, f in E.terms:
        total += _poly(coeffs, integral(f, mu))
    return total


def _derivative(coeffs):
    return tuple(i * c for i, c in enumerate(coeffs))[1:] or (0,)


def _max_abs_on(coeffs, lo, hi) -> float:
    """``max |p(x)|`` over ``[lo, hi]`` for a polynomial ``p``."""
    pts = [lo, hi]
    d = _derivative(coeffs)
    if len(d) > 1 and any(c != 0 for c in d[1:]):
        trimmed = list(d)
        while len(trimmed) > 1 and trimmed[-1] == 0:
            trimmed.pop()
        if len(trimmed) == 2:
            pts.append(Fraction(-trimmed[0]) / trimmed[1] if _is_exact(trimmed[0]) and _is_exact(trimmed[1])
                       else -trimmed[0] / trimmed[1])
        else:
            for root in np.roots([float(c) for c in reversed(trimmed)]):
                if abs(root.imag) < 1e-12:
                    pts.append(float(root.real))
    best = 0
    for x in pts:
        if lo <= x <= hi:
            best = max(best, abs(_poly(coeffs, x)))
    return best


def modulus_bound(E: EnergyFunctional, eps, value_range: Sequence | None = None):
    """Upper bound on ``sup |E(mu) - E(nu)|`` over pairs with ``W1(mu, nu) <= eps``.

    A window-``w`` function changes only between points closer than
    ``2**-(w-1)``, so its Lipschitz constant is at most its oscillation times
    ``2**(w-1)``; the outer polynomial contributes ``max |F'|`` on the range.
    """
    total = 0
    for j, (coeffs, f) in enumerate(E.terms):
        lo, hi = f.value_range()
        if value_range is not None:
            rlo, rhi = value_range[j] if isinstance(value_range[0], (tuple, list)) else value_range
            if rlo > lo or rhi < hi:
                raise ValueError("value_range must contain the range of every term")
            lo, hi = rlo, rhi
        lip_f = (max(f.table) - min(f.table)) * 2 ** (f.window - 1)
        if lip_f == 0:
            continue
        lip_F = _max_abs_on(_derivative(coeffs), lo, hi)
        total += lip_F * lip_f * eps
    return total


class Scores:
    """``n * E(Delta_x^n)`` per word, with exact values and an order-preserving rank.

    ``values`` is float; ``exact`` (optional) lists the distinct exact values
    in increasing order and ``rank[i]`` indexes it.  Reductions over groups of
    words use the rank, so the reported sup/inf are exact.
    """

    def __init__(self, values: np.ndarray, rank: np.ndarray, levels: list, exact: bool):
        self.values = values
        self.rank = rank
        self.levels = levels
        self.exact = exact

    def reduce(self, groups: np.ndarray, n_groups: int, how: str):
        if how == "max":
            best = np.full(n_groups, -1, dtype=np.int64)
            np.maximum.at(best, groups, self.rank)
        else:
            best = np.full(n_groups, len(self.levels), dtype=np.int64)
            np.minimum.at(best, groups, self.rank)
        levels = [self.levels[i] for i in best]
        floats = np.array([float(v) for v in levels])
        return floats, (levels if self.exact else None)


def _window_sums(words: np.ndarray, f: CylinderFunction, n: int, scaled: bool):
    k = f.system.alphabet_size
    if scaled:
        den = math.lcm(*[Fraction(v).denominator for v in f.table])
        table = np.zeros(k**f.window, dtype=object)
        codes = word_codes(word_array(f.system, f.window), k)
        for c, v in zip(codes, f.table):
            table[c] = int(Fraction(v) * den)
        acc = np.zeros(len(words), dtype=object)
        for i in range(n):
            acc = acc + table[word_codes(words, k, i, f.window)]
        return acc, den
    lut = f.lookup()
    acc = np.zeros(len(words))
    for i in range(n):
        acc += lut[word_codes(words, k, i, f.window)]
    return acc, 1


def word_scores(E: EnergyFunctional, words: np.ndarray, n: int, exact: bool = False) -> Scores:
    """``n * E(Delta_x^n)`` for every row of ``words`` (length >= n + window - 1)."""
    if words.shape[1] < n + E.window - 1 and E.terms:
        raise ValueError("words too short for this n and energy window")
    N = len(words)
    if exact and not E.is_exact():
        raise ValueError("exact scores need rational coefficients and tables")
    if not E.terms:
        zero = 0 if exact else 0.0
        return Scores(np.zeros(N), np.zeros(N, dtype=np.int64), [zero], exact)
    if not exact:
        vals = np.zeros(N)
        for coeffs, f in E.terms:
            s, _ = _window_sums(words, f, n, False)
            vals += n * np.polyval([float(c) for c in reversed(coeffs)], s / n)
        uniq, inverse = np.unique(vals, return_inverse=True)
        return Scores(vals, np.asarray(inverse).reshape(-1), list(uniq), False)
    sums = []
    dens = []
    for coeffs, f in E.terms:
        s, den = _window_sums(words, f, n, True)
        sums.append(np.array(s, dtype=np.int64))
        dens.append(den)
    key = np.stack(sums, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    exact_vals = []
    for row in uniq:
        v = Fraction(0)
        for (coeffs, _), s, den in zip(E.terms, row, dens):
            v += n * _poly([Fraction(c) for c in coeffs], Fraction(int(s), den * n))
        exact_vals.append(v)
    order = sorted(range(len(exact_vals)), key=lambda i: exact_vals[i])
    levels, rank_of = [], [0] * len(exact_vals)
    for i in order:
        if not levels or exact_vals[i] != levels[-1]:
            levels.append(exact_vals[i])
        rank_of[i] = len(levels) - 1
    levels = [_normal(v) for v in levels]
    rank = np.array(rank_of, dtype=np.int64)[inverse]
    floats = np.array([float(v) for v in levels])[rank]
    return Scores(floats, rank, levels, True)


def _normal(v: Fraction):
    return v.numerator if v.denominator == 1 else v


def compose(E: EnergyFunctional, code) -> EnergyFunctional:
    """``E`` pulled back through a sliding block code: each ``f`` becomes ``f o code``."""
    terms = []
    for coeffs, f in E.terms:
        W = code.window + f.window - 1
        words = code.source.words(W)
        index = {w: i for i, w in enumerate(f.system.words(f.window))}
        table = tuple(f.table[index[code.image_word(w)]] for w in words)
        terms.append((coeffs, CylinderFunction(code.source, W, table)))
    return EnergyFunctional(tuple(terms))
