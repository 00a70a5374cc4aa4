"""Finitely supported and Markov measures on a subshift, with W1 and TV distances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .covers import CylSet
from .subshift import PointRep, Subshift, first_disagreement, shift, word_array, word_codes

__all__ = [
    "AtomicMeasure",
    "MarkovMeasure",
    "CylinderMarginal",
    "empirical",
    "measure_of",
    "word_masses",
    "pushforward",
    "convex_combine",
    "w1",
    "tv",
    "bernoulli",
]

ROW_TOL = 1e-12


def _exact(w):
    if isinstance(w, bool):
        raise TypeError("weights must be numbers")
    if isinstance(w, Rational):
        return Fraction(w)
    if isinstance(w, float):
        return Fraction(w)
    raise TypeError(f"unsupported weight type {type(w).__name__}")


class AtomicMeasure:
    """Probability measure with finitely many atoms and exact rational weights."""

    __slots__ = ("_atoms",)

    def __init__(self, atoms: Iterable):
        acc: dict = {}
        items = atoms.items() if isinstance(atoms, dict) else atoms
        for x, w in items:
            w = _exact(w)
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if w == 0:
                continue
            acc[x] = acc.get(x, Fraction(0)) + w
        if not acc:
            raise ValueError("a probability measure needs at least one atom")
        total = sum(acc.values())
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self._atoms = tuple(sorted(acc.items(), key=lambda kv: _point_key(kv[0])))

    @classmethod
    def dirac(cls, x: PointRep) -> "AtomicMeasure":
        return cls([(x, 1)])

    @property
    def atoms(self) -> tuple:
        return self._atoms

    def weight(self, x: PointRep) -> Fraction:
        for y, w in self._atoms:
            if y == x:
                return w
        return Fraction(0)

    def support(self) -> list:
        return [x for x, _ in self._atoms]

    def __len__(self):
        return len(self._atoms)

    def __eq__(self, other):
        if isinstance(other, AtomicMeasure):
            return self._atoms == other._atoms
        return NotImplemented

    def __hash__(self):
        return hash(self._atoms)

    def __repr__(self):
        body = ", ".join(f"{w}*delta[{x}]" for x, w in self._atoms)
        return f"AtomicMeasure({body})"


def _point_key(x: PointRep):
    return (x.preperiod, x.cycle)


def empirical(x: PointRep, n: int) -> AtomicMeasure:
    """Average of the point masses at ``x, Tx, ..., T^{n-1}x``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = []
    y = x
    for _ in range(n):
        pts.append((y, Fraction(1, n)))
        y = shift(y)
    return AtomicMeasure(pts)


def pushforward(mu: AtomicMeasure) -> AtomicMeasure:
    """Image of ``mu`` under the shift."""
    return AtomicMeasure([(shift(x), w) for x, w in mu.atoms])


def convex_combine(pairs: Sequence) -> AtomicMeasure:
    pairs = list(pairs)
    total = sum(_exact(c) for c, _ in pairs)
    if total != 1:
        raise ValueError(f"mixture weights sum to {total}, not 1")
    out = []
    for c, mu in pairs:
        c = _exact(c)
        if c <= 0:
            raise ValueError("mixture weights must be positive")
        out.extend((x, c * w) for x, w in mu.atoms)
    return AtomicMeasure(out)


def _power_stationary(P: np.ndarray) -> np.ndarray:
    # the lazy chain is aperiodic; repeated squaring reaches its limit quickly
    k = P.shape[0]
    Q = 0.5 * (P + np.eye(k))
    for _ in range(64):
        Q2 = Q @ Q
        Q2 /= Q2.sum(axis=1, keepdims=True)
        if np.max(np.abs(Q2 - Q)) < 1e-15:
            Q = Q2
            break
        Q = Q2
    pi = np.full(k, 1.0 / k) @ Q
    for _ in range(50):
        nxt = pi @ P
        if np.max(np.abs(nxt - pi)) < 1e-15:
            break
        pi = 0.5 * (pi + nxt)
    return pi / pi.sum()


class MarkovMeasure:
    """Stationary Markov measure on a memory-1 subshift.

    ``stationary`` may be supplied (any invariant vector, e.g. a mixture over
    closed classes); otherwise it is the limit of the lazy chain started from
    the uniform vector.
    """

    def __init__(self, system: Subshift, transition, stationary=None):
        P = np.array(transition, dtype=float)
        k = system.alphabet_size
        if P.shape != (k, k):
            raise ValueError(f"transition matrix must be {k}x{k}")
        if np.any(P < 0):
            raise ValueError("negative transition probability")
        if np.any((P > 0) & ~system.matrix):
            raise ValueError("transition charges a forbidden pair")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_TOL:
            raise ValueError("rows must sum to 1")
        pi = _power_stationary(P) if stationary is None else np.array(stationary, dtype=float)
        if pi.shape != (k,) or np.any(pi < -1e-15) or abs(pi.sum() - 1) > ROW_TOL:
            raise ValueError("stationary vector must be a probability vector")
        pi = np.clip(pi, 0.0, None)
        resid = np.max(np.abs(pi @ P - pi))
        if resid > ROW_TOL:
            raise ValueError(f"stationarity residual {resid:.3e} too large")
        P.setflags(write=False)
        pi.setflags(write=False)
        self.system = system
        self.transition = P
        self.stationary = pi

    def entropy_rate(self) -> float:
        P = self.transition
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
        return float(-np.sum(self.stationary[:, None] * P * logs))

    def is_irreducible(self) -> bool:
        k = self.system.alphabet_size
        reach = (self.transition > 0) | np.eye(k, dtype=bool)
        for _ in range(k):
            reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
        return bool(reach.all())

    def is_aperiodic(self) -> bool:
        k = self.system.alphabet_size
        A = (self.transition > 0).astype(int)
        M = np.linalg.matrix_power(A, (k - 1) ** 2 + 1) if k > 1 else A
        return bool(np.all(M > 0))

    def is_ergodic(self) -> bool:
        """The stationary vector lives on a single communicating class."""
        support = np.flatnonzero(self.stationary > 1e-13)
        sub = self.transition[np.ix_(support, support)] > 0
        k = len(support)
        reach = sub | np.eye(k, dtype=bool)
        for _ in range(k):
            reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
        return bool(reach.all())

    def key(self) -> bytes:
        return self.transition.tobytes() + self.stationary.tobytes()

    def __repr__(self):
        return f"MarkovMeasure(P={self.transition.tolist()}, pi={self.stationary.tolist()})"


def bernoulli(system: Subshift, probs: Sequence[float]) -> MarkovMeasure:
    """Product measure on a full shift."""
    probs = np.asarray(probs, dtype=float)
    return MarkovMeasure(system, np.tile(probs, (len(probs), 1)), probs)


@dataclass(frozen=True)
class CylinderMarginal:
    """Masses of the admissible ``depth``-words of a (possibly non-Markov) measure."""

    system: Subshift
    depth: int
    masses: tuple
    lossy: bool = True

    def mass_array(self) -> np.ndarray:
        return np.array(self.masses, dtype=float)


def word_masses(mu, length: int) -> np.ndarray:
    """Mass of each admissible ``length``-word, aligned with ``word_array``."""
    if isinstance(mu, MarkovMeasure):
        words = word_array(mu.system, length)
        if length == 0:
            return np.ones(1)
        out = mu.stationary[words[:, 0]].copy()
        for i in range(length - 1):
            out *= mu.transition[words[:, i], words[:, i + 1]]
        return out
    if isinstance(mu, CylinderMarginal):
        if length > mu.depth:
            raise ValueError("marginal is too shallow for this length")
        words = word_array(mu.system, mu.depth)
        k = mu.system.alphabet_size
        codes = word_codes(words, k, 0, length)
        short = word_codes(word_array(mu.system, length), k)
        lookup = {int(c): i for i, c in enumerate(short)}
        out = np.zeros(len(short))
        np.add.at(out, [lookup[int(c)] for c in codes], mu.mass_array())
        return out
    if isinstance(mu, AtomicMeasure):
        raise TypeError("atomic measures need their subshift; use atomic_word_masses")
    raise TypeError(f"unsupported measure {type(mu).__name__}")


def atomic_word_masses(mu: AtomicMeasure, system: Subshift, length: int) -> np.ndarray:
    words = word_array(system, length)
    k = system.alphabet_size
    codes = word_codes(words, k)
    index = {int(c): i for i, c in enumerate(codes)}
    out = np.zeros(len(words))
    for x, w in mu.atoms:
        c = 0
        for s in x.prefix(length):
            c = c * k + s
        out[index[c]] += float(w)
    return out


def measure_of(mu, A: CylSet):
    """Mass of a cylinder union; exact for atomic measures."""
    if isinstance(mu, AtomicMeasure):
        return sum((w for x, w in mu.atoms if A.contains(x)), Fraction(0))
    if A.is_empty():
        return 0.0
    if A.resolution == 0:
        return 1.0
    masses = word_masses(mu, A.resolution)
    words = word_array(A.system, A.resolution)
    k = A.system.alphabet_size
    codes = word_codes(words, k)
    sel = A.mask(A.resolution)[codes]
    return float(masses[sel].sum())


def tv(mu: AtomicMeasure, nu: AtomicMeasure) -> Fraction:
    weights: dict = {}
    for x, w in mu.atoms:
        weights[x] = weights.get(x, 0) + w
    for x, w in nu.atoms:
        weights[x] = weights.get(x, 0) - w
    return sum((abs(v) for v in weights.values()), Fraction(0)) / 2


def _separation_depth(points: list) -> int:
    depth = 0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            depth = max(depth, first_disagreement(points[i], points[j]) + 1)
    return depth


def _w1_tree(mu: AtomicMeasure, nu: AtomicMeasure) -> Fraction:
    # distance 2^-k is a path to the depth-k branch point and back down,
    # with the edge into depth j weighing 2^-(j+1)
    diff: dict = {}
    for x, w in mu.atoms:
        diff[x] = diff.get(x, 0) + w
    for x, w in nu.atoms:
        diff[x] = diff.get(x, 0) - w
    pts = [x for x, v in diff.items() if v != 0]
    if not pts:
        return Fraction(0)
    K = _separation_depth(pts)
    total = Fraction(0)
    for j in range(1, K + 1):
        level: dict = {}
        for x in pts:
            p = x.prefix(j)
            level[p] = level.get(p, 0) + diff[x]
        total += Fraction(1, 2 ** (j + 1)) * sum(abs(v) for v in level.values())
    tail = sum(abs(diff[x]) for x in pts) / 2
    return total + Fraction(1, 2**K) * tail


def _w1_lp(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    a = [x for x, _ in mu.atoms]
    b = [y for y, _ in nu.atoms]
    pa = np.array([float(w) for _, w in mu.atoms])
    pb = np.array([float(w) for _, w in nu.atoms])
    na, nb = len(a), len(b)
    cost = np.empty((na, nb))
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            k = first_disagreement(x, y)
            cost[i, j] = 0.0 if k is None else 2.0**-k
    A_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        A_eq[i, i * nb:(i + 1) * nb] = 1.0
    for j in range(nb):
        A_eq[na + j, j::nb] = 1.0
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=np.concatenate([pa, pb]),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def w1(mu: AtomicMeasure, nu: AtomicMeasure, method: str = "tree"):
    """Wasserstein-1 distance under the shift metric.

    ``method="tree"`` is exact (a Fraction) and uses the cylinder tree;
    ``method="lp"`` solves the transportation problem numerically.
    """
    if method == "tree":
        return _w1_tree(mu, nu)
    if method == "lp":
        return _w1_lp(mu, nu)
    raise ValueError(f"unknown method {method!r}")
