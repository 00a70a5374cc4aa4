"""Maximising ``h_mu(T, U) + E(mu)`` over Markov measures.

The search space is memory-``k`` Markov measures, realised as memory-1
chains on the ``k``-block recoding.  Covers and energies are pulled back to
the block system through the first-symbol code, which is a conjugacy, so the
objective is unchanged.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .covers import Cover, cylinder_partition
from .energy import EnergyFunctional, compose, evaluate
from .entropy import h_rate_cover
from .factor import SlidingBlockCode, pullback_cover
from .measures import MarkovMeasure
from .subshift import Subshift, higher_block

__all__ = [
    "objective",
    "optimize",
    "abundance_check",
    "VariationalReport",
    "is_mixing",
    "closed_classes",
]

GOLDEN = (math.sqrt(5) - 1) / 2


def _is_generating(system: Subshift, U: Cover) -> bool:
    return set(U.elements) == set(cylinder_partition(system, 1).elements)


def objective(mu: MarkovMeasure, U: Cover, E: EnergyFunctional, n_ent: int = 4,
              generating: bool | None = None) -> float:
    """``h_mu(T, U) + E(mu)`` with the cover entropy truncated at ``n_ent``.

    When ``U`` is the one-symbol partition the exact Markov entropy rate is
    used instead of the truncation.
    """
    if generating is None:
        generating = _is_generating(mu.system, U)
    if generating:
        h = mu.entropy_rate()
    else:
        h = h_rate_cover(mu, U, n_ent, system=mu.system).final
    return float(h + float(evaluate(E, mu)))


def is_mixing(system: Subshift) -> bool:
    A = system.matrix.astype(np.int64)
    k = system.alphabet_size
    M = np.linalg.matrix_power(np.minimum(A, 1), (k - 1) ** 2 + 1) if k > 1 else A
    return bool(np.all(M > 0))


def closed_classes(P: np.ndarray) -> list:
    """Communicating classes of the chain that no transition leaves."""
    adj = P > 0
    n, labels = connected_components(adj, directed=True, connection="strong")
    out = []
    for c in range(n):
        members = np.flatnonzero(labels == c)
        leaves = adj[np.ix_(members, np.setdiff1d(np.arange(len(P)), members))]
        if not leaves.any():
            out.append(members)
    return out


def _class_stationary(P: np.ndarray, members: np.ndarray) -> np.ndarray:
    sub = P[np.ix_(members, members)]
    k = len(members)
    A = np.vstack([sub.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    # polish with a few lazy steps
    for _ in range(200):
        nxt = 0.5 * (x + x @ sub)
        if np.max(np.abs(nxt - x)) < 1e-16:
            break
        x = nxt
    out = np.zeros(len(P))
    out[members] = x / x.sum()
    return out


def _measure(system: Subshift, P: np.ndarray, weights: np.ndarray | None = None) -> MarkovMeasure:
    classes = closed_classes(P)
    if weights is None or len(weights) != len(classes):
        weights = np.full(len(classes), 1.0 / len(classes))
    pi = sum(w * _class_stationary(P, c) for w, c in zip(weights, classes))
    return MarkovMeasure(system, P, pi / pi.sum())


@dataclass
class VariationalReport:
    best_measure: MarkovMeasure
    best_value: float
    memory: int
    blocks: list
    abundance_note: str
    n_ent: int
    evaluations: int
    budget_exhausted: bool
    pressure_rate_window: tuple | None = None
    gap: float | None = None
    starts: list = field(default_factory=list)

    def attach_pressure(self, lower: float, upper: float) -> None:
        self.pressure_rate_window = (lower, upper)
        self.gap = upper - self.best_value

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "memory": self.memory,
            "blocks": [list(b) for b in self.blocks],
            "transition": self.best_measure.transition.tolist(),
            "stationary": self.best_measure.stationary.tolist(),
            "n_ent": self.n_ent,
            "evaluations": self.evaluations,
            "budget_exhausted": self.budget_exhausted,
            "pressure_rate_window": list(self.pressure_rate_window) if self.pressure_rate_window else None,
            "gap": self.gap,
            "abundance_note": self.abundance_note,
            "starts": self.starts,
        }


class _Problem:
    def __init__(self, system, U, E, memory, n_ent):
        block_system, blocks = higher_block(system, memory)
        code = SlidingBlockCode(block_system, system, 1, tuple(b[0] for b in blocks), check_length=0)
        self.system = block_system
        self.blocks = blocks
        self.U = pullback_cover(code, U)
        self.E = compose(E, code)
        self.generating = _is_generating(system, U)
        self.n_ent = n_ent
        self.evals = 0

    def value(self, P, weights=None) -> float:
        self.evals += 1
        mu = _measure(self.system, P, weights)
        return objective(mu, self.U, self.E, self.n_ent, generating=self.generating)


def _with_entry(P: np.ndarray, i: int, j: int, t: float, succ: Sequence[int]) -> np.ndarray:
    Q = P.copy()
    others = [s for s in succ if s != j]
    rest = Q[i, others].sum()
    if rest > 0:
        Q[i, others] *= (1 - t) / rest
    else:
        Q[i, others] = (1 - t) / len(others)
    Q[i, j] = t
    return Q


def _golden_max(f, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-10):
    """Maximise ``f`` on ``[lo, hi]`` by golden section, checking both endpoints."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best = max([(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)], key=lambda p: p[0])
    return best[1], best[0]


def _ascend(problem: _Problem, P: np.ndarray, budget: int, tol: float = 1e-13):
    S = problem.system
    rows = [(i, S.successors(i)) for i in range(S.alphabet_size) if len(S.successors(i)) > 1]
    cur = problem.value(P)
    exhausted = False
    while True:
        start = cur
        for i, succ in rows:
            coords = succ if len(succ) > 2 else succ[:1]
            for j in coords:
                if problem.evals >= budget:
                    exhausted = True
                    break
                t, val = _golden_max(lambda t: problem.value(_with_entry(P, i, j, t, succ)))
                if val > cur:
                    P, cur = _with_entry(P, i, j, t, succ), val
            if exhausted:
                break
        if exhausted or cur - start < tol:
            break
    return P, cur, exhausted


def _shift_mass(w: np.ndarray, c: int, t: float) -> np.ndarray:
    # weight t on class c, the rest spread as in w (uniformly if w sits on c)
    rest = w.copy()
    rest[c] = 0.0
    if rest.sum() > 0:
        rest /= rest.sum()
    else:
        rest = np.full(len(w), 1.0 / (len(w) - 1))
        rest[c] = 0.0
    out = (1 - t) * rest
    out[c] = t
    return out


def _polish_mixture(problem: _Problem, P: np.ndarray, cur: float):
    k = len(closed_classes(P))
    if k < 2:
        return None, cur
    best_w, best = None, cur
    for c in range(k):
        w = np.zeros(k)
        w[c] = 1.0
        val = problem.value(P, w)
        if val > best:
            best_w, best = w, val
    w = np.full(k, 1.0 / k) if best_w is None else best_w
    for _ in range(3):
        for c in range(k):
            t, val = _golden_max(lambda t: problem.value(P, _shift_mass(w, c, t)))
            if val > best:
                w = _shift_mass(w, c, t)
                best_w, best = w, val
    return best_w, best


def _run_start(args):
    system, U, E, memory, n_ent, P0, budget = args
    problem = _Problem(system, U, E, memory, n_ent)
    P, val, exhausted = _ascend(problem, P0, budget)
    w, val2 = _polish_mixture(problem, P, val)
    return P, w, val2, problem.evals, exhausted


def _start_kernels(system: Subshift, n_starts: int, seed: int) -> list:
    A = system.matrix.astype(float)
    out = [A / A.sum(axis=1, keepdims=True)]
    rng = np.random.default_rng(seed)
    for _ in range(n_starts - 1):
        P = np.zeros_like(A)
        for i in range(len(A)):
            idx = np.flatnonzero(A[i])
            P[i, idx] = rng.dirichlet(np.ones(len(idx)))
        out.append(P)
    return out


def _abundance_note(system: Subshift) -> str:
    if is_mixing(system):
        return ("mixing SFT: every Markov measure is an objective-limit of ergodic Markov "
                "measures, so the abundance hypothesis holds on the searched family")
    return ("system is not mixing: abundance of ergodic measures is an unverified hypothesis "
            "for this instance")


def optimize(system: Subshift, U: Cover, E: EnergyFunctional, memory: int = 1,
             budget: int = 20000, n_starts: int = 3, seed: int = 0, n_ent: int = 4,
             workers: int = 1) -> VariationalReport:
    """Multi-start coordinate ascent over memory-``k`` Markov measures.

    Each coordinate move reweights one transition probability (the rest of
    its row rescaled) by golden-section search.  When the best kernel has
    several closed classes the weights of its stationary mixture are then
    optimised too.  The result is a lower bound on the supremum.
    """
    if memory < 1:
        raise ValueError("memory must be >= 1")
    block_system, blocks = higher_block(system, memory)
    kernels = _start_kernels(block_system, n_starts, seed)
    per_start = max(1, budget // max(1, len(kernels)))
    jobs = [(system, U, E, memory, n_ent, P0, per_start) for P0 in kernels]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_start, jobs))
    else:
        results = [_run_start(j) for j in jobs]
    best = None
    for P, w, val, _, _ in results:
        mu = _measure(block_system, P, w)
        key = (val, mu.key())
        if best is None or key[0] > best[0][0] or (key[0] == best[0][0] and key[1] < best[0][1]):
            best = (key, mu)
    (value, _), mu = best
    return VariationalReport(
        best_measure=mu,
        best_value=float(value),
        memory=memory,
        blocks=blocks,
        abundance_note=_abundance_note(system),
        n_ent=n_ent,
        evaluations=sum(r[3] for r in results),
        budget_exhausted=any(r[4] for r in results),
        starts=[float(r[2]) for r in results],
    )


def abundance_check(system: Subshift, candidates: Sequence[MarkovMeasure], U: Cover,
                    E: EnergyFunctional, eps: float, n_ent: int = 4) -> dict:
    """Look for ergodic Markov measures within ``eps`` of each candidate's objective.

    Witnesses are the candidate itself when ergodic, the chains carried by
    each closed class of its kernel, and mixtures of its kernel with the
    uniform kernel on allowed transitions.
    """
    A = system.matrix.astype(float)
    uniform = A / A.sum(axis=1, keepdims=True)
    entries = []
    for mu in candidates:
        target = objective(mu, U, E, n_ent)
        if mu.is_ergodic():
            entries.append({"value": target, "witness_value": target, "witness": "candidate",
                            "passed": True})
            continue
        best_val, best_name = -math.inf, None
        P = mu.transition
        for c in closed_classes(P):
            nu = MarkovMeasure(system, P, _class_stationary(P, c))
            v = objective(nu, U, E, n_ent)
            if v > best_val:
                best_val, best_name = v, f"closed class {c.tolist()}"
        for k in range(1, 31):
            t = 2.0**-k
            Q = (1 - t) * P + t * uniform
            nu = MarkovMeasure(system, Q)
            if not nu.is_ergodic():
                continue
            v = objective(nu, U, E, n_ent)
            if v > best_val:
                best_val, best_name = v, f"uniform mixture t=2^-{k}"
        entries.append({"value": target, "witness_value": best_val, "witness": best_name,
                        "passed": bool(best_val > target - eps)})
    return {"entries": entries, "all_passed": all(e["passed"] for e in entries),
            "note": _abundance_note(system), "eps": eps}
