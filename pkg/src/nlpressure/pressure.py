"""Finite-n pressure sums over covers, separated and spanning sets, and their audit.

For a cover ``U`` and ``n`` steps every quantity here is a finite
optimisation over the atoms of the partition generated by ``U_0^{n-1}``,
evaluated on words of the working resolution
``R = n + max(cover resolution, energy window) - 1``.  On words of that length
``n * E(Delta_x^n)`` is a function of the word, so sup and inf over an atom are
maxima and minima over finitely many words.

Every sum is returned either as a float log-value or, in exact mode, as an
:class:`ExpSum` with rational exponents.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np

from .covers import (
    Cover,
    CylSet,
    JoinAtoms,
    ResolutionCapExceeded,
    _int_bits,
    diam_and_lebesgue,
    is_finer,
)
from .energy import EnergyFunctional, modulus_bound, word_scores
from .logexp import ExpSum, logsumexp
from .search import min_weighted_set_cover
from .subshift import Subshift, bowen_resolution, word_array, word_codes

__all__ = [
    "WeightedAtom",
    "AtomTable",
    "atom_weights",
    "default_cap",
    "p1",
    "p2",
    "p3",
    "p4",
    "log_cover_number",
    "pn_separated",
    "qn_spanning",
    "greedy_bn",
    "greedy_disjointify",
    "sandwich_scales",
    "audit_instance",
    "PressureReport",
    "pressure_report",
    "ResolutionCapExceeded",
]

WORD_BUDGET = 2**22


MAX_RESOLUTION = 4096


@lru_cache(maxsize=None)
def default_cap(system: Subshift) -> int:
    """Longest word length whose admissible words number at most ``2**22``."""
    A = [[int(v) for v in row] for row in system.allowed]
    k = system.alphabet_size
    vec = [1] * k  # words of the current length, by first symbol
    R = 1
    while R < MAX_RESOLUTION:
        vec = [sum(A[i][j] * vec[j] for j in range(k)) for i in range(k)]
        if sum(vec) > WORD_BUDGET:
            break
        R += 1
    return R


def _check_cap(system: Subshift, R: int, cap: int | None):
    limit = default_cap(system) if cap is None else cap
    if R > limit:
        raise ResolutionCapExceeded(
            f"working resolution {R} exceeds the cap {limit}; instance too large for exact mode"
        )


def _total(exponents, exact: bool):
    if exact:
        return ExpSum.total(exponents)
    return logsumexp([float(q) for q in exponents])


def _log(value) -> float:
    return value.log() if isinstance(value, ExpSum) else float(value)


@dataclass(frozen=True)
class WeightedAtom:
    """An atom of the join with the extreme values of ``n * E(Delta_x^n)`` on it."""

    atom: CylSet
    sup_weight: object
    inf_weight: object
    homes: tuple


class AtomTable:
    """Atoms of ``U_0^{n-1}`` with exact sup/inf weights, shared by ``p1``..``p4``."""

    def __init__(self, system: Subshift, U: Cover, E: EnergyFunctional, n: int,
                 exact: bool = False, cap: int | None = None):
        R = n + max(U.resolution, E.window, 1) - 1
        _check_cap(system, R, cap)
        self.system, self.U, self.E, self.n, self.exact = system, U, E, n, exact
        self.join = J = JoinAtoms(system, U, n, resolution=R)
        scores = word_scores(E, J.words, n, exact)
        self.levels = scores.levels
        N = J.n_atoms
        self.sup_rank = np.full(N, -1, dtype=np.int64)
        np.maximum.at(self.sup_rank, J.atom_of_word, scores.rank)
        self.inf_rank = np.full(N, len(scores.levels), dtype=np.int64)
        np.minimum.at(self.inf_rank, J.atom_of_word, scores.rank)
        lv = np.array([float(v) for v in scores.levels])
        self.sup = lv[self.sup_rank]
        self.inf = lv[self.inf_rank]
        self.top_level = scores.levels[int(self.sup_rank.max())]
        self.top = float(self.top_level)

    def value(self, rank: int):
        v = self.levels[rank]
        return v if self.exact else float(v)

    def weighted_atoms(self) -> list:
        J = self.join
        return [
            WeightedAtom(J.atom_set(a), self.value(int(self.sup_rank[a])),
                         self.value(int(self.inf_rank[a])), tuple(J.homes(a)))
            for a in range(J.n_atoms)
        ]

    def _element_rank(self, cov: int, how: str) -> int:
        ranks = self.sup_rank if how == "max" else self.inf_rank
        idx = list(_int_bits(cov))
        return int(ranks[idx].max() if how == "max" else ranks[idx].min())

    def _cover_by(self, elements: list, how: str):
        ranks = [self._element_rank(cov, how) for _, cov in elements]
        lv = [float(self.levels[r]) for r in ranks]
        costs = [math.exp(v - self.top) for v in lv]
        def exact_fn(counts):
            return ExpSum({self.levels[r] - self.top_level: c for r, c in counts.items()})
        chosen = min_weighted_set_cover([cov for _, cov in elements], costs,
                                        self.join.covered_mask(), keys=ranks,
                                        exact=exact_fn if self.exact else None)
        return _total((self.levels[ranks[s]] for s in chosen), self.exact), [elements[s][0] for s in chosen]

    def p1(self):
        # a class inside a maximal element may absorb every member no heavier
        # than its peak at no cost, so the candidates are (element, peak level)
        sets = []
        for name, cov in self.join.maximal_elements:
            idx = list(_int_bits(cov))
            ranks = self.sup_rank[idx]
            for r in sorted(set(ranks.tolist())):
                m = 0
                for a, ra in zip(idx, ranks):
                    if ra <= r:
                        m |= 1 << a
                sets.append((name, m, r))
        costs = [math.exp(float(self.levels[r]) - self.top) for _, _, r in sets]
        def exact_fn(counts):
            return ExpSum({self.levels[r] - self.top_level: c for r, c in counts.items()})
        chosen = min_weighted_set_cover([m for _, m, _ in sets], costs, self.join.covered_mask(),
                                        keys=[r for _, _, r in sets],
                                        exact=exact_fn if self.exact else None)
        self.p1_classes = [(sets[s][0], sets[s][2]) for s in chosen]
        return _total((self.levels[sets[s][2]] for s in chosen), self.exact)

    def p2(self):
        # a class can always grow into a maximal element, which lowers its infimum
        value, self.p2_subcover = self._cover_by(self.join.maximal_elements, "min")
        return value

    def p3(self):
        value, self.p3_subcover = self._cover_by(self.join.distinct_elements, "max")
        return value

    def p4(self):
        value, self.p4_subcover = self._cover_by(self.join.distinct_elements, "min")
        return value

    def cover_number(self) -> int:
        maximal = self.join.maximal_elements
        chosen = min_weighted_set_cover([c for _, c in maximal], [1.0] * len(maximal),
                                        self.join.covered_mask())
        return len(chosen)


def atom_weights(system: Subshift, U: Cover, E: EnergyFunctional, n: int,
                 exact: bool = False, cap: int | None = None) -> list:
    return AtomTable(system, U, E, n, exact, cap).weighted_atoms()


def _pn(name):
    def f(system: Subshift, U: Cover, E: EnergyFunctional, n: int, exact: bool = False,
          cap: int | None = None):
        return getattr(AtomTable(system, U, E, n, exact, cap), name)()
    f.__name__ = name
    return f


p1 = _pn("p1")
p1.__doc__ = """Least ``sum_V sup_V exp(n E(Delta_x^n))`` over covers ``V`` finer than ``U_0^{n-1}``."""
p2 = _pn("p2")
p2.__doc__ = """Least ``sum_V inf_V exp(n E(Delta_x^n))`` over covers ``V`` finer than ``U_0^{n-1}``."""
p3 = _pn("p3")
p3.__doc__ = """Least ``sum_B sup_B exp(n E(Delta_x^n))`` over subcovers ``B`` of ``U_0^{n-1}``."""
p4 = _pn("p4")
p4.__doc__ = """Least ``sum_B inf_B exp(n E(Delta_x^n))`` over subcovers ``B`` of ``U_0^{n-1}``."""


def log_cover_number(system: Subshift, U: Cover, n: int, cap: int | None = None) -> float:
    return math.log(AtomTable(system, U, EnergyFunctional.zero(), n, cap=cap).cover_number())


def _ball_scores(system: Subshift, E: EnergyFunctional, n: int, m: int, exact: bool,
                 cap: int | None, how: str):
    r = bowen_resolution(n, m)
    R = max(r, n + E.window - 1, 1)
    _check_cap(system, R, cap)
    words = word_array(system, R)
    scores = word_scores(E, words, n, exact)
    if r == 0:
        groups = np.zeros(len(words), dtype=np.int64)
        n_groups = 1
    else:
        codes = word_codes(words, system.alphabet_size, 0, r)
        _, groups = np.unique(codes, return_inverse=True)
        groups = np.asarray(groups).reshape(-1)
        n_groups = int(groups.max()) + 1
    floats, exact_vals = scores.reduce(groups, n_groups, how)
    return _total(exact_vals if exact else floats, exact)


def pn_separated(system: Subshift, E: EnergyFunctional, n: int, m: int,
                 exact: bool = False, cap: int | None = None):
    """Largest ``sum exp(n E(Delta_x^n))`` over ``(n, 2**-m)``-separated sets.

    Bowen balls are cylinders of length ``n + m``; a separated set holds at
    most one point per cylinder, and the best choice takes the heaviest point
    of each.
    """
    return _ball_scores(system, E, n, m, exact, cap, "max")


def qn_spanning(system: Subshift, E: EnergyFunctional, n: int, m: int,
                exact: bool = False, cap: int | None = None):
    """Smallest ``sum exp(n E(Delta_x^n))`` over ``(n, 2**-m)``-spanning sets.

    Every ``(n + m)``-cylinder must contain a point of a spanning set, and one
    point per cylinder suffices, so the lightest point of each is taken.
    """
    return _ball_scores(system, E, n, m, exact, cap, "min")


def _leq(a, b, log_shift=0, tol: float = 1e-9) -> bool:
    """``a <= b * exp(log_shift)`` for two sums (ExpSum or float log-values)."""
    if isinstance(a, ExpSum) and isinstance(b, ExpSum) and not isinstance(log_shift, float):
        return a.compare(b.shift(log_shift)) <= 0
    la, lb = _log(a), _log(b) + float(log_shift)
    return la <= lb + tol * max(1.0, abs(lb))


def _exp_sum_ge(lhs, rhs, factor: int, tol: float = 1e-9) -> bool:
    """``factor * lhs >= rhs``."""
    if isinstance(lhs, ExpSum) and isinstance(rhs, ExpSum):
        return (lhs * factor).compare(rhs) >= 0
    return _log(lhs) + math.log(factor) >= _log(rhs) - tol * max(1.0, abs(_log(rhs)))


def _cycled(partitions: Sequence, n: int) -> list:
    if not partitions:
        raise ValueError("at least one partition is needed")
    return [partitions[i % len(partitions)] for i in range(n)]


@dataclass
class GreedyResult:
    points: list
    words: list
    total: object
    certificate: dict

    @property
    def passed(self) -> bool:
        return all(v for k, v in self.certificate.items() if isinstance(v, bool))


def greedy_bn(system: Subshift, E: EnergyFunctional, n: int, partitions: Sequence,
              cover: Cover | None = None, exact: bool = False, cap: int | None = None) -> GreedyResult:
    """Greedy set with at most one point in each atom of each ``(alpha_l)_0^{n-1}``.

    Repeatedly takes the heaviest remaining point and discards every atom of
    every supplied partition's ``n``-join that contains it.  With exact maxima
    each pick weighs at least half of the remaining supremum.  When ``cover``
    is given the certificate also checks ``2n * sum >= p1(n)`` for it.
    """
    alphas = _cycled(list(partitions), n)
    if cover is not None:
        for a in alphas:
            if not is_finer(a, cover):
                raise ValueError("every partition must refine the cover")
    r = max(max(a.resolution for a in alphas), E.window, 1)
    R = n + r - 1
    _check_cap(system, R, cap)
    words = word_array(system, R)
    scores = word_scores(E, words, n, exact)
    atom_ids = []
    cache = {}
    for a in alphas:
        if a not in cache:
            cache[a] = JoinAtoms(system, a, n, resolution=R).atom_of_word
        atom_ids.append(cache[a])
    alive = np.ones(len(words), dtype=bool)
    picked = []
    halves = True
    while alive.any():
        idx = np.flatnonzero(alive)
        best = idx[np.argmax(scores.rank[idx])]
        # the pick is the exact maximum, so it beats half the supremum
        halves &= bool(scores.rank[best] == scores.rank[idx].max())
        picked.append(int(best))
        for ids in atom_ids:
            alive &= ids != ids[best]
    one_per_atom = all(len({int(ids[p]) for p in picked}) == len(picked) for ids in atom_ids)
    total = _total((scores.levels[scores.rank[p]] for p in picked), exact)
    cert = {"one_point_per_atom": one_per_atom, "half_supremum": halves,
            "size": len(picked), "log_sum": _log(total)}
    if cover is not None:
        pv = AtomTable(system, cover, E, n, exact, cap).p1()
        cert["log_p1"] = _log(pv)
        cert["bound_2n"] = _exp_sum_ge(total, pv, 2 * n)
    wl = [tuple(int(s) for s in words[p]) for p in picked]
    return GreedyResult([system.extend_to_point(w) for w in wl], wl, total, cert)


@dataclass
class DisjointifyResult:
    points: list
    pieces: list
    labels: list
    certificate: dict

    @property
    def passed(self) -> bool:
        return all(v for v in self.certificate.values() if isinstance(v, bool))


def greedy_disjointify(system: Subshift, U: Cover, E: EnergyFunctional, n: int, m: int | None = None,
                       exact: bool = False, cap: int | None = None) -> DisjointifyResult:
    """Disjoint refinement of ``U_0^{n-1}`` whose class suprema sit on a separated set.

    The radius is ``2**-m``; by default half the Lebesgue number of ``U``.
    Each step takes the heaviest uncovered point ``x``, an element of
    ``U_0^{n-1}`` containing its Bowen ball, and keeps the part of that element
    not claimed before.
    """
    _, leb = diam_and_lebesgue(U)
    k = leb.denominator.bit_length() - 1
    if m is None:
        m = k + 1
    if Fraction(1, 2**m) > leb:
        raise ValueError(f"radius 2^-{m} exceeds the Lebesgue number {leb} of the cover")
    r = bowen_resolution(n, m)
    R = max(r, n + max(U.resolution, E.window, 1) - 1)
    _check_cap(system, R, cap)
    J = JoinAtoms(system, U, n, resolution=R)
    words = J.words
    scores = word_scores(E, words, n, exact)
    ball = word_codes(words, system.alphabet_size, 0, r)

    remaining = np.ones(len(words), dtype=bool)
    points, labels, pieces = [], [], []
    claimed = np.zeros(len(words), dtype=bool)
    while remaining.any():
        idx = np.flatnonzero(remaining)
        x = int(idx[np.argmax(scores.rank[idx])])
        in_ball = ball == ball[x]
        ball_atoms = 0
        for a in np.unique(J.atom_of_word[in_ball]):
            ball_atoms |= 1 << int(a)
        label = None
        for h in J.homes(int(J.atom_of_word[x])):
            if (J.coverage(h) & ball_atoms) == ball_atoms:
                label = h
                break
        if label is None:
            raise AssertionError("no element of the join contains the Bowen ball")
        elem = J.word_mask(J.coverage(label))
        piece = elem & ~claimed
        claimed |= elem
        remaining &= ~elem
        points.append(x)
        labels.append(label)
        pieces.append(piece)

    disjoint = bool(np.all(np.sum(pieces, axis=0) == 1))
    refines = all(not np.any(p & ~J.word_mask(J.coverage(l))) for p, l in zip(pieces, labels))
    prefixes = [tuple(int(s) for s in words[p][:r]) for p in points]
    separated = len(set(prefixes)) == len(prefixes)
    sup_ranks = [int(scores.rank[p].max()) if p.any() else -1 for p in pieces]
    pt_ranks = [int(scores.rank[x]) for x in points]
    sums_equal = sup_ranks == pt_ranks
    total = _total((scores.levels[r_] for r_ in pt_ranks), exact)
    p1_val = AtomTable(system, U, E, n, exact, cap).p1()
    pn_val = pn_separated(system, E, n, m, exact, cap)
    cert = {
        "disjoint_cover": disjoint,
        "refines_join": refines,
        "separated": separated,
        "sums_equal": sums_equal,
        "p1_le_sum": _leq(p1_val, total),
        "sum_le_Pn": _leq(total, pn_val),
        "m": m,
        "log_sum": _log(total),
        "log_p1": _log(p1_val),
        "log_Pn": _log(pn_val),
    }
    word_tuples = [tuple(int(s) for s in words[x]) for x in points]
    piece_sets = [CylSet(system, R, frozenset(tuple(int(s) for s in w) for w in words[p])) for p in pieces]
    return DisjointifyResult([system.extend_to_point(w) for w in word_tuples], piece_sets, labels, cert)


def sandwich_scales(U: Cover) -> dict:
    """Dyadic exponents used by the cover/separated-set comparisons.

    ``m_diam``: radius equal to the cover diameter; ``m_sep``: the smallest
    dyadic radius strictly above it (may be -1, meaning the whole space);
    ``m_half_leb``: half the Lebesgue number.
    """
    diam, leb = diam_and_lebesgue(U)
    k = leb.denominator.bit_length() - 1
    if diam == 0:
        m_diam = max(U.resolution, 1)
        m_sep = m_diam
        eps_diam = Fraction(0)
    else:
        m_diam = diam.denominator.bit_length() - 1
        m_sep = m_diam - 1
        eps_diam = diam
    return {"diam": diam, "lebesgue": leb, "eps_diam": eps_diam, "m_sep": m_sep,
            "eps_sep": Fraction(2) ** (-m_sep), "m_half_leb": k + 1}


def audit_instance(system: Subshift, U: Cover, E: EnergyFunctional, n: int,
                   exact: bool = False, cap: int | None = None) -> dict:
    """All finite-n comparisons between the four cover sums and P_n, Q_n."""
    t = AtomTable(system, U, E, n, exact, cap)
    q1, q2, q3, q4 = t.p1(), t.p2(), t.p3(), t.p4()
    sc = sandwich_scales(U)
    tau_diam = n * modulus_bound(E, sc["eps_diam"])
    tau_sep = n * modulus_bound(E, sc["eps_sep"])
    Q_half = qn_spanning(system, E, n, sc["m_half_leb"], exact, cap)
    Q_sep = qn_spanning(system, E, n, sc["m_sep"], exact, cap)
    P_sep = pn_separated(system, E, n, sc["m_sep"], exact, cap)
    checks = {
        "p2<=p4": _leq(q2, q4),
        "p4<=p3": _leq(q4, q3),
        "p2<=p1": _leq(q2, q1),
        "p1<=p3": _leq(q1, q3),
        "p3*exp(-n*tau)<=Q(delta/2)": _leq(q3, Q_half, tau_diam),
        "Q(eps)<=P(eps)": _leq(Q_sep, P_sep),
        "P(eps)<=p2*exp(n*tau)": _leq(P_sep, q2, tau_sep),
        "p1<=p2*exp(n*tau)": _leq(q1, q2, tau_diam),
        "p3<=p4*exp(n*tau)": _leq(q3, q4, tau_diam),
        "p4<=Q(delta/2)": _leq(q4, Q_half),
    }
    values = {"p1": q1, "p2": q2, "p3": q3, "p4": q4, "Q_half_leb": Q_half,
              "Q_sep": Q_sep, "P_sep": P_sep, "n_tau_diam": tau_diam, "n_tau_sep": tau_sep}
    return {"n": n, "checks": checks, "values": values, "scales": sc}


@dataclass
class PressureReport:
    """Per-n pressure sums, rates, the inequality audit and trailing-window summaries."""

    rows: list
    m_list: list
    audits: list
    window: int
    summary: dict = field(default_factory=dict)
    exact: bool = False

    COLUMNS_VERSION = 1

    @property
    def per_n(self) -> list:
        return [(r["n"], r["log_p1"], r["log_p2"], r["log_p3"], r["log_p4"]) for r in self.rows]

    def rates(self, which: str) -> list:
        return [r[f"rate_{which}"] for r in self.rows]

    @property
    def all_passed(self) -> bool:
        return all(all(a["checks"].values()) for a in self.audits)

    def header(self) -> list:
        cols = ["n"] + [f"log_{p}" for p in ("p1", "p2", "p3", "p4")]
        cols += [f"rate_{p}" for p in ("p1", "p2", "p3", "p4")] + ["log_N"]
        for m in self.m_list:
            cols += [f"log_Pn_m{m}", f"log_Qn_m{m}"]
        if self.audits:
            cols += [f"audit:{k}" for k in self.audits[0]["checks"]]
        if self.exact:
            cols += [f"exact_{p}" for p in ("p1", "p2", "p3", "p4")]
        return cols

    def to_csv(self) -> str:
        lines = [f"# nlpressure pressure table, columns v{self.COLUMNS_VERSION}"]
        lines.append(",".join(self.header()))
        for row, audit in zip(self.rows, self.audits or [None] * len(self.rows)):
            cells = [str(row["n"])]
            for key in [f"log_{p}" for p in ("p1", "p2", "p3", "p4")] + \
                       [f"rate_{p}" for p in ("p1", "p2", "p3", "p4")] + ["log_N"]:
                cells.append(_fmt(row[key]))
            for m in self.m_list:
                cells += [_fmt(row[f"log_Pn_m{m}"]), _fmt(row[f"log_Qn_m{m}"])]
            if audit is not None:
                cells += ["pass" if v else "FAIL" for v in audit["checks"].values()]
            if self.exact:
                cells += ['"' + row[f"exact_{p}"] + '"' for p in ("p1", "p2", "p3", "p4")]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        def clean(a):
            return {
                "n": a["n"],
                "checks": a["checks"],
                "values": {k: (_log(v) if isinstance(v, ExpSum) else float(v)) for k, v in a["values"].items()},
                "scales": {k: str(v) for k, v in a["scales"].items()},
            }
        return {
            "rows": self.rows,
            "m_list": self.m_list,
            "window": self.window,
            "summary": self.summary,
            "audits": [clean(a) for a in self.audits],
            "exact": self.exact,
        }


def _fmt(x) -> str:
    return repr(float(x))


def _report_row(args):
    system, U, E, n, m_list, exact, cap, audit = args
    t = AtomTable(system, U, E, n, exact, cap)
    vals = {"p1": t.p1(), "p2": t.p2(), "p3": t.p3(), "p4": t.p4()}
    row = {"n": n}
    for k, v in vals.items():
        row[f"log_{k}"] = _log(v)
        row[f"rate_{k}"] = _log(v) / n
        if exact:
            row[f"exact_{k}"] = v.to_str()
    row["log_N"] = math.log(t.cover_number())
    for m in m_list:
        row[f"log_Pn_m{m}"] = _log(pn_separated(system, E, n, m, exact, cap))
        row[f"log_Qn_m{m}"] = _log(qn_spanning(system, E, n, m, exact, cap))
    a = audit_instance(system, U, E, n, exact, cap) if audit else None
    return row, a


def pressure_report(system: Subshift, U: Cover, E: EnergyFunctional, n_range: Sequence[int],
                    m_list: Sequence[int] = (), exact: bool = False, window: int | None = None,
                    cap: int | None = None, audit: bool = True, workers: int = 1) -> PressureReport:
    """Assemble the pressure table for ``n`` in ``n_range``.

    The limsup/liminf columns of the summary are the max/min of each rate over
    the last ``window`` values of ``n``; they are estimates, not limits.
    """
    n_range = sorted(n_range)
    if not n_range:
        raise ValueError("n_range must be nonempty")
    if exact and not E.is_exact():
        raise ValueError("exact mode needs rational energy coefficients and tables")
    jobs = [(system, U, E, n, list(m_list), exact, cap, audit) for n in n_range]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_report_row, jobs))
    else:
        results = [_report_row(j) for j in jobs]
    rows = [r for r, _ in results]
    audits = [a for _, a in results if a is not None]
    if window is None:
        window = max(1, math.ceil(len(n_range) / 2))
    tail = rows[-window:]
    summary = {}
    for p in ("p1", "p2", "p3", "p4"):
        vals = [r[f"rate_{p}"] for r in tail]
        summary[f"upper_{p}"] = max(vals)
        summary[f"lower_{p}"] = min(vals)
    summary["window_n"] = [r["n"] for r in tail]
    return PressureReport(rows, list(m_list), audits, window, summary, exact)
