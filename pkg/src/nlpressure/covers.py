"""Clopen sets as cylinder unions, finite covers and partitions.

Every Borel set used in the computations is a finite union of cylinders of a
common length.  ``JoinAtoms`` is the vectorised view of the iterated join
``U_0^{n-1}`` that the pressure and entropy searches run on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .search import min_weighted_set_cover
from .subshift import PointRep, Subshift, encode, word_array, word_codes

__all__ = [
    "CylSet",
    "Cover",
    "Partition",
    "is_finer",
    "join",
    "preimage",
    "iterated_join",
    "generated_partition",
    "atom_homes",
    "enumerate_assignments",
    "minimal_subcover_count",
    "diameter",
    "lebesgue_number",
    "diam_and_lebesgue",
    "cylinder_partition",
    "JoinAtoms",
]


def _lift(system: Subshift, words: frozenset, r: int, target: int) -> frozenset:
    if target < r:
        raise ValueError("cannot lift to a coarser resolution")
    cur = words
    if not cur:
        return cur
    for length in range(r, target):
        if length == 0:
            cur = frozenset((a,) for a in range(system.alphabet_size))
            continue
        cur = frozenset(w + (s,) for w in cur for s in system.successors(w[-1]))
    return cur


@dataclass(frozen=True)
class CylSet:
    """Union of the cylinders ``[w]`` for ``w`` in ``words`` (all of length ``resolution``).

    Always stored at the smallest resolution that represents the set.
    """

    system: Subshift
    resolution: int
    words: frozenset

    def __post_init__(self):
        words = frozenset(tuple(int(s) for s in w) for w in self.words)
        r = self.resolution
        for w in words:
            if len(w) != r:
                raise ValueError(f"word {w} does not have length {r}")
            if not self.system.is_admissible(w):
                raise ValueError(f"word {w} is not admissible")
        if not words:
            r = 0
        while r > 0:
            prefixes = {w[:-1] for w in words}
            if r == 1:
                full = len(words) == self.system.alphabet_size
            else:
                full = sum(len(self.system.successors(p[-1])) for p in prefixes) == len(words)
            if not full:
                break
            words = frozenset(prefixes)
            r -= 1
        object.__setattr__(self, "resolution", r)
        object.__setattr__(self, "words", words)

    @classmethod
    def of(cls, system: Subshift, words: Sequence) -> "CylSet":
        """Union of cylinders of possibly different lengths."""
        words = [tuple(int(s) for s in w) for w in words]
        if not words:
            return cls.empty(system)
        r = max(len(w) for w in words)
        acc = set()
        for w in words:
            if len(w) == 0:
                return cls.whole(system)
            acc |= _lift(system, frozenset([w]), len(w), r)
        return cls(system, r, frozenset(acc))

    @classmethod
    def whole(cls, system: Subshift) -> "CylSet":
        return cls(system, 0, frozenset([()]))

    @classmethod
    def empty(cls, system: Subshift) -> "CylSet":
        return cls(system, 0, frozenset())

    def lift(self, r: int) -> frozenset:
        return _lift(self.system, self.words, self.resolution, r)

    def __len__(self):
        return len(self.words)

    def is_empty(self) -> bool:
        return not self.words

    def _pair(self, other: "CylSet"):
        if self.system != other.system:
            raise ValueError("sets live in different subshifts")
        r = max(self.resolution, other.resolution)
        return r, self.lift(r), other.lift(r)

    def __and__(self, other: "CylSet") -> "CylSet":
        r, a, b = self._pair(other)
        return CylSet(self.system, r, a & b)

    def __or__(self, other: "CylSet") -> "CylSet":
        r, a, b = self._pair(other)
        return CylSet(self.system, r, a | b)

    def __sub__(self, other: "CylSet") -> "CylSet":
        r, a, b = self._pair(other)
        return CylSet(self.system, r, a - b)

    def __le__(self, other: "CylSet") -> bool:
        r, a, b = self._pair(other)
        return a <= b

    def complement(self) -> "CylSet":
        return CylSet.whole(self.system) - self

    def contains(self, x: PointRep) -> bool:
        return x.prefix(self.resolution) in self.words

    def mask(self, r: int) -> np.ndarray:
        """Boolean lookup table over base-k codes of ``r``-words."""
        k = self.system.alphabet_size
        out = np.zeros(k**r, dtype=bool)
        for w in self.lift(r):
            out[encode(w, k)] = True
        return out

    def __str__(self):
        if self.resolution == 0:
            return "X" if self.words else "{}"
        return "|".join("[" + "".join(map(str, w)) + "]" for w in sorted(self.words))


@dataclass(frozen=True)
class Cover:
    """Finite family of nonempty cylinder unions whose union is the whole space.

    ``labels`` optionally names the elements (choice sequences for iterated
    joins); elements equal as sets may then appear under different labels.
    """

    system: Subshift
    elements: tuple
    labels: tuple | None = None

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise ValueError("a cover needs at least one element")
        for e in elements:
            if e.system != self.system:
                raise ValueError("cover element from a different subshift")
            if e.is_empty():
                raise ValueError("cover elements must be nonempty")
        if self.labels is not None and len(self.labels) != len(elements):
            raise ValueError("labels must match elements")
        r = self.resolution
        union = set()
        for e in elements:
            union |= e.lift(r)
        if len(union) != len(word_array(self.system, r)):
            raise ValueError("not a cover: union misses part of the space")

    @classmethod
    def from_words(cls, system: Subshift, elements: Sequence[Sequence]) -> "Cover":
        return cls(system, tuple(CylSet.of(system, ws) for ws in elements))

    @property
    def resolution(self) -> int:
        return max(e.resolution for e in self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def is_partition(self) -> bool:
        r = self.resolution
        seen = set()
        for e in self.elements:
            ws = e.lift(r)
            if seen & ws:
                return False
            seen |= ws
        return True

    def distinct(self) -> "Cover":
        """Same cover with set-equal elements merged (first label kept)."""
        seen, els, labs = set(), [], []
        for i, e in enumerate(self.elements):
            if e in seen:
                continue
            seen.add(e)
            els.append(e)
            if self.labels is not None:
                labs.append(self.labels[i])
        return Cover(self.system, tuple(els), tuple(labs) if self.labels is not None else None)


class Partition(Cover):
    def __post_init__(self):
        super().__post_init__()
        if not self.is_partition():
            raise ValueError("partition elements must be pairwise disjoint")


def cylinder_partition(system: Subshift, r: int = 1) -> Partition:
    """Partition into the admissible ``r``-cylinders."""
    return Partition(
        system, tuple(CylSet(system, r, frozenset([w])) for w in system.words(r))
    )


def is_finer(U: Cover, V: Cover) -> bool:
    """``U`` refines ``V``: every element of ``U`` lies in some element of ``V``."""
    return all(any(u <= v for v in V.elements) for u in U.elements)


def join(U: Cover, V: Cover) -> Cover:
    """Nonempty pairwise intersections, set-equal results merged."""
    out = []
    seen = set()
    for u in U.elements:
        for v in V.elements:
            w = u & v
            if w.is_empty() or w in seen:
                continue
            seen.add(w)
            out.append(w)
    return Cover(U.system, tuple(out))


def preimage(A: CylSet, i: int) -> CylSet:
    """``T^{-i} A``: points whose ``i``-th shift lies in ``A``."""
    if i == 0 or A.is_empty():
        return A
    system = A.system
    words = set()
    r = A.resolution
    for w in system.words(r + i):
        if w[i:] in A.words:
            words.add(w)
    return CylSet(system, r + i, frozenset(words))


def iterated_join(system: Subshift, U: Cover, n: int) -> Cover:
    """``U_0^{n-1}`` with elements labelled by their choice sequences."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pre = [[preimage(e, i) for e in U.elements] for i in range(n)]
    els, labels = [], []
    for c in itertools.product(range(len(U)), repeat=n):
        cur = pre[0][c[0]]
        for i in range(1, n):
            if cur.is_empty():
                break
            cur = cur & pre[i][c[i]]
        if not cur.is_empty():
            els.append(cur)
            labels.append(c)
    return Cover(system, tuple(els), tuple(labels))


def _membership(V: Cover):
    r = V.resolution
    lifted = [e.lift(r) for e in V.elements]
    words = V.system.words(r) if r > 0 else [()]
    groups: dict = {}
    for w in words:
        sig = tuple(i for i, ws in enumerate(lifted) if w in ws)
        groups.setdefault(sig, []).append(w)
    return r, groups


def atom_homes(V: Cover) -> list:
    """Atoms of the partition generated by ``V`` with the indices of the elements containing them."""
    r, groups = _membership(V)
    out = []
    for sig, ws in sorted(groups.items(), key=lambda kv: min(kv[1])):
        out.append((CylSet(V.system, r, frozenset(ws)), sig))
    return out


def generated_partition(V: Cover) -> Partition:
    """Partition into the nonempty Boolean combinations of the elements of ``V``."""
    return Partition(V.system, tuple(a for a, _ in atom_homes(V)))


def enumerate_assignments(V: Cover) -> Iterator[Partition]:
    """Stream the finite family ``P*(V)``.

    Each atom of the generated partition goes to one element containing it;
    atoms sent to the same element are merged into one class.
    """
    atoms = atom_homes(V)
    for choice in itertools.product(*(homes for _, homes in atoms)):
        classes: dict = {}
        for (atom, _), h in zip(atoms, choice):
            classes[h] = classes[h] | atom if h in classes else atom
        yield Partition(V.system, tuple(classes[h] for h in sorted(classes)))


def assignment_count(V: Cover) -> int:
    out = 1
    for _, homes in atom_homes(V):
        out *= len(homes)
    return out


def minimal_subcover_count(V: Cover) -> int:
    """``N(V)``: the fewest elements of ``V`` that still cover the space."""
    atoms = atom_homes(V)
    masks = [0] * len(V)
    for a, (_, homes) in enumerate(atoms):
        for h in homes:
            masks[h] |= 1 << a
    chosen = min_weighted_set_cover(masks, [1.0] * len(masks), (1 << len(atoms)) - 1)
    return len(chosen)



def _cylinder_diameter(system: Subshift, word: tuple) -> Fraction:
    # first index at which two points of [word] can differ
    r = len(word)
    frontier = {word[-1]}
    for t in range(1, system.alphabet_size + 2):
        nxt = set()
        count = 0
        for s in frontier:
            succ = system.successors(s)
            count += len(succ)
            nxt.update(succ)
        if count > 1:
            return Fraction(1, 2 ** (r - 1 + t))
        frontier = nxt
    return Fraction(0)


def diameter(A: CylSet) -> Fraction:
    """Largest distance between two points of ``A`` (0 for a single point)."""
    if A.is_empty():
        return Fraction(0)
    r = max(A.resolution, 1)
    words = sorted(A.lift(r))
    best = Fraction(0)
    for u, v in zip(words, words[1:]):
        # lexicographic neighbours realise the minimal common prefix
        k = next(i for i in range(r) if u[i] != v[i])
        best = max(best, Fraction(1, 2**k))
    for w in words:
        best = max(best, _cylinder_diameter(A.system, w))
    return best


def lebesgue_number(U: Cover) -> Fraction:
    """Largest ``2**-k`` such that every closed ball of that radius sits in one element."""
    r = U.resolution
    lifted = [e.lift(r) for e in U.elements]
    for k in range(0, r + 1):
        balls = [()] if k == 0 else U.system.words(k)
        ok = True
        for b in balls:
            ext = _lift(U.system, frozenset([b]), k, r)
            if not any(ext <= ws for ws in lifted):
                ok = False
                break
        if ok:
            return Fraction(1, 2**k)
    raise AssertionError("an r-cylinder always lies in some element")


def diam_and_lebesgue(U: Cover) -> tuple:
    return max(diameter(e) for e in U.elements), lebesgue_number(U)


class ResolutionCapExceeded(RuntimeError):
    """The exact computation would need words longer than the configured cap."""


def _bits_to_int(flags: np.ndarray) -> int:
    if flags.size == 0:
        return 0
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def _int_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class JoinAtoms:
    """Atoms of the partition generated by ``U_0^{n-1}``, computed on words.

    A point ``x`` lies in the element with choice sequence ``c`` iff
    ``T^i x`` is in ``U[c_i]`` for every ``i < n``.  So the elements containing
    ``x`` form the product of its per-position home sets, and the atom of
    ``x`` is fixed by that tuple of home sets.  Everything is evaluated on the
    admissible words of length ``R >= n + r - 1`` (``r`` the cover
    resolution); extra length lets callers attach quantities that look
    further ahead, such as energies.
    """

    def __init__(self, system: Subshift, cover: Cover, n: int, resolution: int | None = None,
                 cap: int | None = None):
        if n < 1:
            raise ValueError("n must be >= 1")
        if len(cover) > 62:
            raise ValueError("covers with more than 62 elements are not supported")
        self.system = system
        self.cover = cover
        self.n = n
        self.r = max(cover.resolution, 1)
        R = n + self.r - 1 if resolution is None else max(n + self.r - 1, resolution)
        if cap is not None and R > cap:
            raise ResolutionCapExceeded(f"working resolution {R} exceeds cap {cap}")
        self.resolution = R
        self.words = word_array(system, R)
        k = system.alphabet_size
        d = len(cover)
        self.d = d
        member = np.stack([e.mask(self.r) for e in cover.elements])
        self.position_member = []
        sig = np.zeros((len(self.words), n), dtype=np.int64)
        for i in range(n):
            pm = member[:, word_codes(self.words, k, i, self.r)]
            self.position_member.append(pm)
            for j in range(d):
                sig[:, i] |= pm[j].astype(np.int64) << j
        uniq, first, inverse = np.unique(sig, axis=0, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        self.atom_of_word = rank[np.asarray(inverse).reshape(-1)]
        self.signatures = uniq[order]
        self.first_word = first[order]
        self.n_atoms = len(order)
        self._pos_masks = [
            [_bits_to_int(((self.signatures[:, i] >> j) & 1) == 1) for j in range(d)]
            for i in range(n)
        ]

    @cached_property
    def home_sets(self) -> list:
        """Per atom, per position: indices of cover elements containing it."""
        out = []
        for row in self.signatures:
            out.append(tuple(tuple(j for j in range(self.d) if (int(s) >> j) & 1) for s in row))
        return out

    @cached_property
    def home_counts(self) -> list:
        out = []
        for hs in self.home_sets:
            c = 1
            for h in hs:
                c *= len(h)
            out.append(c)
        return out

    def homes(self, atom: int) -> Iterator[tuple]:
        """Choice sequences of the elements of ``U_0^{n-1}`` containing ``atom``."""
        return itertools.product(*self.home_sets[atom])

    @cached_property
    def elements(self) -> dict:
        """Nonempty elements: choice sequence -> bitmask of contained atoms."""
        out: dict = {}
        masks = self._pos_masks
        n, d = self.n, self.d
        stack = [((), (1 << self.n_atoms) - 1)]
        # explicit DFS keeps lexicographic order
        while stack:
            prefix, cov = stack.pop()
            i = len(prefix)
            if i == n:
                out[prefix] = cov
                continue
            for j in reversed(range(d)):
                c2 = cov & masks[i][j]
                if c2:
                    stack.append((prefix + (j,), c2))
        return out

    def coverage(self, label: tuple) -> int:
        cov = (1 << self.n_atoms) - 1
        for i, j in enumerate(label):
            cov &= self._pos_masks[i][j]
        return cov

    @cached_property
    def distinct_elements(self) -> list:
        """``(label, coverage)`` with set-equal elements merged, first label kept."""
        seen = set()
        out = []
        for label, cov in self.elements.items():
            if cov in seen:
                continue
            seen.add(cov)
            out.append((label, cov))
        return out

    @cached_property
    def maximal_elements(self) -> list:
        """Distinct elements not strictly contained in another element."""
        counts = self.home_counts
        out = []
        for label, cov in self.distinct_elements:
            pivot = min(_int_bits(cov), key=lambda a: (counts[a], a))
            dominated = False
            for other in self.homes(pivot):
                oc = self.elements[other]
                if oc != cov and (oc & cov) == cov:
                    dominated = True
                    break
            if not dominated:
                out.append((label, cov))
        return out

    def atom_indices(self, mask: int) -> list:
        return list(_int_bits(mask))

    def word_mask(self, atom_mask: int) -> np.ndarray:
        flags = np.zeros(self.n_atoms, dtype=bool)
        flags[list(_int_bits(atom_mask))] = True
        return flags[self.atom_of_word]

    def element_set(self, label: tuple) -> CylSet:
        sel = self.word_mask(self.coverage(label))
        return CylSet(self.system, self.resolution,
                      frozenset(tuple(int(s) for s in w) for w in self.words[sel]))

    def atom_set(self, atom: int) -> CylSet:
        sel = self.atom_of_word == atom
        return CylSet(self.system, self.resolution,
                      frozenset(tuple(int(s) for s in w) for w in self.words[sel]))

    def covered_mask(self) -> int:
        return (1 << self.n_atoms) - 1
