"""Subshifts of finite type, eventually periodic points and the shift metric.

The metric is ``d(x, y) = 2**-k`` with ``k`` the first index where ``x`` and
``y`` disagree.  Under this metric the Bowen ball ``B_n(x, 2**-m)`` is the
cylinder of the first ``n + m`` symbols of ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "Subshift",
    "PointRep",
    "transition_diagnostics",
    "enumerate_words",
    "word_array",
    "shift",
    "dist",
    "bowen_resolution",
    "higher_block",
]

Word = tuple


def transition_diagnostics(matrix) -> list[str]:
    """Problems that prevent ``matrix`` from defining a surjective SFT."""
    try:
        rows = [[int(bool(v)) for v in row] for row in matrix]
    except TypeError:
        return ["transition matrix must be a list of rows"]
    k = len(rows)
    if k == 0:
        return ["alphabet must be nonempty"]
    out = []
    for i, row in enumerate(rows):
        if len(row) != k:
            out.append(f"row {i} has length {len(row)}, expected {k}")
    if out:
        return out
    for i in range(k):
        if not any(rows[i]):
            out.append(f"symbol {i} has no successor")
        if not any(rows[j][i] for j in range(k)):
            out.append(f"symbol {i} has no predecessor")
    return out


@dataclass(frozen=True)
class Subshift:
    """One-sided SFT given by a 0/1 transition relation on ``range(alphabet_size)``."""

    alphabet_size: int
    allowed: tuple
    one_sided: bool = True

    def __post_init__(self):
        rows = tuple(tuple(bool(v) for v in row) for row in self.allowed)
        object.__setattr__(self, "allowed", rows)
        if len(rows) != self.alphabet_size:
            raise ValueError(
                f"transition matrix has {len(rows)} rows, alphabet has {self.alphabet_size}"
            )
        problems = transition_diagnostics(rows)
        if problems:
            raise ValueError("; ".join(problems))

    @classmethod
    def from_matrix(cls, matrix, one_sided: bool = True) -> "Subshift":
        rows = [list(r) for r in np.asarray(matrix).tolist()]
        return cls(len(rows), tuple(tuple(r) for r in rows), one_sided)

    @classmethod
    def full(cls, k: int) -> "Subshift":
        return cls(k, tuple((True,) * k for _ in range(k)))

    @classmethod
    def forbidding(cls, k: int, forbidden: Sequence[Sequence[int]]) -> "Subshift":
        rows = [[True] * k for _ in range(k)]
        for a, b in forbidden:
            rows[a][b] = False
        return cls(k, tuple(tuple(r) for r in rows))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.allowed, dtype=bool)

    def successors(self, a: int) -> tuple:
        return _successors(self)[a]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not (0 <= s < self.alphabet_size) for s in word):
            return False
        return all(self.allowed[a][b] for a, b in zip(word, word[1:]))

    def words(self, length: int) -> list:
        return enumerate_words(self, length)

    def extend_to_point(self, word: Sequence[int]) -> "PointRep":
        """Deterministic eventually periodic point whose prefix is ``word``.

        Follows the smallest successor from the last symbol until a symbol
        repeats, then closes the loop.
        """
        word = tuple(word)
        if not word:
            word = (min(a for a in range(self.alphabet_size)),)
        if not self.is_admissible(word):
            raise ValueError(f"word {word} is not admissible")
        tail = [word[-1]]
        seen = {word[-1]: 0}
        while True:
            nxt = self.successors(tail[-1])[0]
            if nxt in seen:
                start = seen[nxt]
                break
            seen[nxt] = len(tail)
            tail.append(nxt)
        # tail[start:] is the cycle, entered right after tail[start - 1]
        pre = word[:-1] + tuple(tail[:start])
        cyc = tuple(tail[start:])
        return PointRep(pre, cyc)

    def periodic_points(self, max_pre: int, max_cycle: int) -> list:
        """All distinct points with preperiod <= max_pre and cycle <= max_cycle."""
        out = set()
        for c in range(1, max_cycle + 1):
            for cyc in enumerate_words(self, c):
                if not self.allowed[cyc[-1]][cyc[0]]:
                    continue
                for p in range(0, max_pre + 1):
                    if p == 0:
                        out.add(PointRep((), cyc))
                        continue
                    for pre in enumerate_words(self, p):
                        if self.allowed[pre[-1]][cyc[0]]:
                            out.add(PointRep(pre, cyc))
        return sorted(out, key=lambda x: (len(x.preperiod) + len(x.cycle), x.preperiod, x.cycle))


@lru_cache(maxsize=None)
def _successors(system: Subshift) -> tuple:
    return tuple(
        tuple(b for b in range(system.alphabet_size) if system.allowed[a][b])
        for a in range(system.alphabet_size)
    )


@lru_cache(maxsize=256)
def word_array(system: Subshift, length: int) -> np.ndarray:
    """Admissible words of ``length`` as rows of an int8 array, lexicographic."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int8)
    A = system.matrix
    words = np.arange(system.alphabet_size, dtype=np.int8)[:, None]
    for _ in range(length - 1):
        rows, cols = np.nonzero(A[words[:, -1]])
        words = np.hstack([words[rows], cols.astype(np.int8)[:, None]])
    words.setflags(write=False)
    return words


def enumerate_words(system: Subshift, length: int) -> list:
    """Admissible words of the given length in lexicographic order."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return [tuple(int(s) for s in row) for row in word_array(system, length)]


def word_codes(words: np.ndarray, k: int, start: int = 0, length: int | None = None) -> np.ndarray:
    """Base-``k`` integer codes of the windows ``words[:, start:start+length]``."""
    if length is None:
        length = words.shape[1] - start
    code = np.zeros(words.shape[0], dtype=np.int64)
    for t in range(length):
        code = code * k + words[:, start + t]
    return code


def encode(word: Sequence[int], k: int) -> int:
    code = 0
    for s in word:
        code = code * k + int(s)
    return code


@dataclass(frozen=True)
class PointRep:
    """Eventually periodic sequence ``preperiod + cycle + cycle + ...``.

    Stored in canonical form (primitive cycle, shortest preperiod), so two
    representations of the same sequence compare equal.
    """

    preperiod: tuple = ()
    cycle: tuple = field(default=(0,))

    def __post_init__(self):
        pre = tuple(int(s) for s in self.preperiod)
        cyc = tuple(int(s) for s in self.cycle)
        if not cyc:
            raise ValueError("cycle must be nonempty")
        p = len(cyc)
        for d in range(1, p + 1):
            if p % d == 0 and cyc == cyc[:d] * (p // d):
                cyc = cyc[:d]
                break
        while pre and pre[-1] == cyc[-1]:
            pre = pre[:-1]
            cyc = cyc[-1:] + cyc[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "cycle", cyc)

    def __getitem__(self, i: int) -> int:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.cycle[(i - len(self.preperiod)) % len(self.cycle)]

    def prefix(self, length: int) -> tuple:
        return tuple(self[i] for i in range(length))

    def is_admissible(self, system: Subshift) -> bool:
        seq = self.preperiod + self.cycle + self.cycle[:1]
        return system.is_admissible(seq)

    def __str__(self):
        pre = "".join(map(str, self.preperiod))
        return f"{pre}({''.join(map(str, self.cycle))})^inf"


def shift(x: PointRep) -> PointRep:
    if x.preperiod:
        return PointRep(x.preperiod[1:], x.cycle)
    return PointRep((), x.cycle[1:] + x.cycle[:1])


def first_disagreement(x: PointRep, y: PointRep) -> int | None:
    """First index where ``x`` and ``y`` differ, or None when equal."""
    bound = max(len(x.preperiod), len(y.preperiod)) + math.lcm(len(x.cycle), len(y.cycle)) + 1
    for i in range(bound):
        if x[i] != y[i]:
            return i
    return None


def dist(x: PointRep, y: PointRep) -> Fraction:
    k = first_disagreement(x, y)
    return Fraction(0) if k is None else Fraction(1, 2**k)


def bowen_resolution(n: int, m: int) -> int:
    """Cylinder length equal to the Bowen ball ``B_n(x, 2**-m)``.

    A negative ``m`` means a radius above the diameter of the space, where the
    ball is everything.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m < 0:
        return 0
    return n + m


def higher_block(system: Subshift, k: int) -> tuple:
    """Recode ``system`` on its admissible ``k``-blocks.

    Returns ``(block_system, blocks)`` where symbol ``i`` of the recoded shift
    stands for ``blocks[i]``.
    """
    if k < 1:
        raise ValueError("block length must be >= 1")
    blocks = enumerate_words(system, k)
    index = {b: i for i, b in enumerate(blocks)}
    size = len(blocks)
    rows = [[False] * size for _ in range(size)]
    for i, b in enumerate(blocks):
        for s in system.successors(b[-1]):
            rows[i][index[b[1:] + (s,)]] = True
    return Subshift(size, tuple(tuple(r) for r in rows)), blocks
