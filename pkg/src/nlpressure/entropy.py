"""Shannon and cover entropies, entropy rates and the log-sum inequality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, softmax

from .covers import (
    Cover,
    JoinAtoms,
    _int_bits,
    atom_homes,
    cylinder_partition,
    enumerate_assignments,
)
from .measures import AtomicMeasure, MarkovMeasure, atomic_word_masses, measure_of, word_masses
from .search import min_entropy_assignment, min_weighted_set_cover
from .subshift import Subshift

__all__ = [
    "EntropyRateEstimate",
    "shannon",
    "h_cover_static",
    "h_cover_join",
    "h_rate",
    "h_rate_cover",
    "h_plus",
    "htop_cover",
    "logsum_bound",
    "log_subcover_count",
]


def _phi(t: float) -> float:
    return -t * math.log(t) if t > 0 else 0.0


def _entropy_of(masses) -> float:
    return float(sum(_phi(float(m)) for m in masses))


@dataclass
class EntropyRateEstimate:
    """Finite-``n`` values of ``(1/n) H_n`` and a few summaries."""

    per_n: list
    monotone_flag: bool
    final: float
    inf_value: float
    closed_form: float | None = None
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, per_n: list, tol: float = 1e-12, **kw) -> "EntropyRateEstimate":
        vals = [v for _, v in per_n]
        mono = all(b <= a + tol for a, b in zip(vals, vals[1:]))
        return cls(per_n, mono, vals[-1], min(vals), **kw)


def shannon(mu, alpha: Cover) -> float:
    """``sum -mu(A) log mu(A)`` over the classes of a partition."""
    return _entropy_of(measure_of(mu, A) for A in alpha.elements)


def _masses(mu, system: Subshift, length: int) -> np.ndarray:
    if isinstance(mu, AtomicMeasure):
        return atomic_word_masses(mu, system, length)
    return word_masses(mu, length)


def h_cover_static(mu, U: Cover) -> float:
    """``H_mu(U)``: least entropy of a partition finer than the cover ``U``.

    The search runs over the finite family of assignments of atoms of the
    partition generated by ``U`` to elements containing them.
    """
    atoms = atom_homes(U)
    masses = [float(measure_of(mu, a)) for a, _ in atoms]
    value, _ = min_entropy_assignment(masses, [list(h) for _, h in atoms])
    return value


def _join_masses(mu, J: JoinAtoms) -> np.ndarray:
    wm = _masses(mu, J.system, J.resolution)
    return np.bincount(J.atom_of_word, weights=wm, minlength=J.n_atoms)


def h_cover_join(mu, system: Subshift, U: Cover, n: int, cap: int | None = None) -> float:
    """``H_mu(U_0^{n-1})`` computed on the atoms of the iterated join.

    Sending atoms to a larger element only merges classes, which cannot raise
    entropy, so the candidate homes are the maximal elements.
    """
    J = JoinAtoms(system, U, n, cap=cap)
    masses = _join_masses(mu, J)
    maximal = J.maximal_elements
    cands: list = [[] for _ in range(J.n_atoms)]
    for g, (_, cov) in enumerate(maximal):
        for a in _int_bits(cov):
            cands[a].append(g)
    value, _ = min_entropy_assignment(list(masses), cands)
    return value


def _partition_join_entropy(mu, system: Subshift, alpha: Cover, n: int) -> float:
    J = JoinAtoms(system, alpha, n)
    return _entropy_of(_join_masses(mu, J))


def _markov_closed_form(mu: MarkovMeasure) -> float:
    return mu.entropy_rate()


def h_rate(mu, alpha: Cover, n_max: int, system: Subshift | None = None) -> EntropyRateEstimate:
    """``(1/n) H_mu(alpha_0^{n-1})`` for ``n = 1..n_max``.

    For a Markov measure and the one-symbol partition the closed form
    ``-sum pi_i P_ij log P_ij`` is attached for comparison.
    """
    if not alpha.is_partition():
        raise ValueError("h_rate needs a partition")
    system = system or alpha.system
    per_n = [(n, _partition_join_entropy(mu, system, alpha, n) / n) for n in range(1, n_max + 1)]
    closed = None
    if isinstance(mu, MarkovMeasure) and alpha.distinct().elements == cylinder_partition(system, 1).elements:
        closed = _markov_closed_form(mu)
    est = EntropyRateEstimate.from_values(per_n, closed_form=closed)
    if isinstance(mu, MarkovMeasure) and not est.monotone_flag:
        raise AssertionError("entropy of joins of a partition must be subadditive")
    return est


def h_rate_cover(mu, U: Cover, n_max: int, system: Subshift | None = None,
                 cap: int | None = None) -> EntropyRateEstimate:
    system = system or U.system
    per_n = [(n, h_cover_join(mu, system, U, n, cap=cap) / n) for n in range(1, n_max + 1)]
    return EntropyRateEstimate.from_values(per_n)


def h_plus(mu, U: Cover, n_max: int, system: Subshift | None = None) -> float:
    """Least truncated entropy rate over partitions ``{A_i}`` with ``A_i`` inside ``U_i``."""
    system = system or U.system
    best = math.inf
    seen = set()
    for alpha in enumerate_assignments(U):
        key = frozenset(alpha.elements)
        if key in seen:
            continue
        seen.add(key)
        val = _partition_join_entropy(mu, system, alpha, n_max) / n_max
        best = min(best, val)
    return best


def log_subcover_count(system: Subshift, U: Cover, n: int, cap: int | None = None) -> float:
    """``log N(U_0^{n-1})``."""
    J = JoinAtoms(system, U, n, cap=cap)
    maximal = J.maximal_elements
    chosen = min_weighted_set_cover([cov for _, cov in maximal], [1.0] * len(maximal),
                                    J.covered_mask())
    return math.log(len(chosen))


def htop_cover(system: Subshift, U: Cover, n_max: int, cap: int | None = None) -> EntropyRateEstimate:
    """``(1/n) log N(U_0^{n-1})`` for ``n = 1..n_max``.

    The sequence is subadditive in ``n`` but need not decrease step by step,
    so monotonicity is reported rather than enforced.
    """
    per_n = [(n, log_subcover_count(system, U, n, cap) / n) for n in range(1, n_max + 1)]
    return EntropyRateEstimate.from_values(per_n)


def logsum_bound(a, b) -> tuple:
    """Both sides of ``sum b_i (a_i - log b_i) <= log sum exp(a_i)`` and the maximiser.

    Equality holds exactly at the Gibbs weights ``exp(a_i) / sum exp(a_j)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("a and b must be nonempty vectors of equal length")
    if np.any(b < 0) or abs(b.sum() - 1.0) > 1e-12:
        raise ValueError("b must be a probability vector")
    pos = b > 0
    lhs = float(np.sum(b[pos] * (a[pos] - np.log(b[pos]))))
    rhs = float(logsumexp(a))
    return lhs, rhs, softmax(a)
