"""Exact branch-and-bound searches over finite incidence structures.

Items and sets are encoded as Python int bitmasks.  Costs are floats on a
common scale; an optional ``exact`` callback settles float near-ties so that
results are exact whenever the callback is.
"""

from __future__ import annotations

import heapq
import math
import sys
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix

__all__ = [
    "min_weighted_set_cover",
    "min_entropy_assignment",
]

TIE = 1e-9
# subproblems with at least this many uncovered items also get the LP bound
LP_ITEMS = 6
# set systems at least this large get a MILP incumbent
MILP_SETS = 12


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Best:
    def __init__(self, exact: Callable | None):
        self.cost = math.inf
        self.solution = None
        self.exact = exact
        self._exact_value = None

    def offer(self, cost: float, solution) -> None:
        if self.solution is None or cost < self.cost * (1 - TIE):
            self._take(cost, solution)
            return
        if cost > self.cost * (1 + TIE) or self.exact is None:
            return
        if self._exact_value is None:
            self._exact_value = self.exact(self.solution)
        val = self.exact(solution)
        if val.compare(self._exact_value) < 0:
            self._take(cost, solution, val)

    def _take(self, cost, solution, exact_value=None):
        self.cost = cost
        self.solution = solution
        self._exact_value = exact_value

    def reaches(self, value) -> bool:
        if self._exact_value is None:
            self._exact_value = self.exact(self.solution)
        return value.compare(self._exact_value) >= 0


def min_weighted_set_cover(
    masks: Sequence[int],
    costs: Sequence[float],
    universe: int,
    keys: Sequence | None = None,
    exact: Callable | None = None,
) -> list:
    """Indices of a minimum-cost subfamily of ``masks`` covering ``universe``.

    ``keys`` (optional) are exact sort keys monotone in ``costs``; they make
    the dominance reduction exact.  ``exact(counts)`` maps ``{key: int}`` to
    the exact value of ``sum counts[k] * cost(k)`` in the units of ``costs``
    (an object with ``sign``, ``compare`` and ``to_float``); it settles float
    near-ties, so the result is exact whenever equal keys mean equal costs.

    Branch and bound: branch on the uncovered item with fewest candidates,
    sibling branches exclude the sets already tried, and prune with a dual
    ascent lower bound of the LP relaxation.
    """
    masks = [m & universe for m in masks]
    if keys is None:
        keys = list(costs)
    n_sets = len(masks)
    item_sets: dict = {}
    for s, m in enumerate(masks):
        for it in _bits(m):
            item_sets.setdefault(it, []).append(s)
    for it in _bits(universe):
        if it not in item_sets:
            raise ValueError(f"item {it} is not covered by any set")

    # a set is dropped when another covers at least as much at no larger cost
    alive = [m != 0 for m in masks]
    for s in range(n_sets):
        if not alive[s]:
            continue
        m = masks[s]
        pivot = min(_bits(m), key=lambda it: len(item_sets[it]))
        for t in item_sets[pivot]:
            if t == s or not alive[t]:
                continue
            mt = masks[t]
            if (mt & m) != m:
                continue
            if keys[t] < keys[s] or (keys[t] == keys[s] and (mt != m or t < s)):
                alive[s] = False
                break

    items = set(_bits(universe))
    cand = {it: sorted((s for s in ss if alive[s]), key=lambda s: (keys[s], s))
            for it, ss in item_sets.items() if it in items}

    # an item with a single candidate forces that set
    forced, covered = [], 0
    for it in sorted(items):
        if covered >> it & 1 or len(cand[it]) != 1:
            continue
        s = cand[it][0]
        forced.append(s)
        covered |= masks[s]
    base = sum(costs[s] for s in forced)
    rest = universe & ~covered
    if not rest:
        return sorted(forced)
    forced_bits = sum(1 << s for s in forced)
    masks = [m & rest for m in masks]
    cand = {it: [s for s in ss if not forced_bits >> s & 1]
            for it, ss in cand.items() if rest >> it & 1}
    live_sets = sorted({s for ss in cand.values() for s in ss})
    # the dual bound is tightest when scarce items are priced first
    dual_order = sorted(cand, key=lambda it: (len(cand[it]), -costs[cand[it][0]], it))

    key_index = {k: i for i, k in enumerate(sorted(set(keys[s] for s in live_sets) | set(keys[s] for s in forced)))}
    key_list = sorted(key_index, key=key_index.get)

    def counts_of(vec) -> dict:
        return {key_list[i]: c for i, c in enumerate(vec) if c}

    def unit(s):
        v = [0] * len(key_list)
        v[key_index[keys[s]]] = 1
        return v

    def vector_of(sol):
        v = [0] * len(key_list)
        for s in sol:
            v[key_index[keys[s]]] += 1
        return v

    def wrap(sol):
        return tuple(sorted(forced + list(sol)))

    def exact_of(sol):
        counts: dict = {}
        for s in sol:
            counts[keys[s]] = counts.get(keys[s], 0) + 1
        return exact(counts)

    best = _Best(exact_of if exact else None)

    # greedy incumbent; a set's cost per new item only grows, so stale heap
    # entries are refreshed lazily
    covered, chosen, total = 0, [], 0.0
    heap = [(costs[s] / masks[s].bit_count(), s) for s in live_sets]
    heapq.heapify(heap)
    while covered != rest:
        ratio, s = heapq.heappop(heap)
        gain = (masks[s] & ~covered).bit_count()
        if gain == 0:
            continue
        fresh = costs[s] / gain
        if heap and fresh > ratio and fresh > heap[0][0]:
            heapq.heappush(heap, (fresh, s))
            continue
        chosen.append(s)
        covered |= masks[s]
        total += costs[s]
    best.offer(base + total, wrap(chosen))

    # a solver incumbent; the search below still proves it (or beats it)
    if len(live_sets) >= MILP_SETS:
        col = {it: j for j, it in enumerate(cand)}
        rows, cols = [], []
        for r, s in enumerate(live_sets):
            for it in _bits(masks[s]):
                rows.append(col[it])
                cols.append(r)
        A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(cand), len(live_sets)))
        res = milp(np.array([costs[s] for s in live_sets]),
                   constraints=LinearConstraint(A, lb=1), integrality=np.ones(len(live_sets)),
                   bounds=Bounds(0, 1), options={"mip_rel_gap": 1e-12})
        if res.x is not None:
            pick = [s for s, v in zip(live_sets, res.x) if v > 0.5]
            got = 0
            for s in pick:
                got |= masks[s]
            if got == rest:
                best.offer(base + sum(costs[s] for s in pick), wrap(pick))

    def dual_bound(covered: int, banned: int) -> float:
        # greedy feasible dual: each uncovered item takes the least slack left
        # among its sets; the prices sum to a lower bound on the remaining cost
        slack: dict = {}
        bound = 0.0
        for it in dual_order:
            if covered >> it & 1:
                continue
            ss = [s for s in cand[it] if not banned >> s & 1]
            if not ss:
                return math.inf
            y = min(slack.get(s, costs[s]) for s in ss)
            if y <= 0:
                continue
            bound += y
            for s in ss:
                slack[s] = slack.get(s, costs[s]) - y
        return bound

    key_cost = [0.0] * len(key_list)
    for s_ in live_sets + forced:
        key_cost[key_index[keys[s_]]] = costs[s_]

    def lp_relaxation(covered: int, banned: int):
        # dual of the LP relaxation; the solver's duals are scaled back into
        # strict feasibility, so the value is a valid bound up to rounding
        its = [it for it in cand if not covered >> it & 1]
        col = {it: j for j, it in enumerate(its)}
        sets = sorted({s for it in its for s in cand[it] if not banned >> s & 1})
        rows, cols = [], []
        for r, s in enumerate(sets):
            for it in _bits(masks[s] & ~covered):
                rows.append(r)
                cols.append(col[it])
        A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(sets), len(its)))
        c = np.array([costs[s] for s in sets])
        # solver tolerances are absolute, so solve at unit scale
        scale = c.max()
        res = linprog(-np.ones(len(its)), A_ub=A, b_ub=c / scale, bounds=(0, None), method="highs")
        if res.status != 0:
            return None
        y = np.maximum(res.x, 0.0) * scale
        # shrink the items of each violated set; duals only decrease, so a
        # repaired set stays feasible (costs may span many orders of magnitude)
        for r in np.nonzero(A @ y > c)[0]:
            idx = A.indices[A.indptr[r]:A.indptr[r + 1]]
            load = y[idx].sum()
            if load > c[r]:
                y[idx] *= c[r] / load * (1 - 1e-15)
        x = np.maximum(-res.ineqlin.marginals, 0.0)
        return float(y.sum()) * (1 - 1e-12), (sets, A, c, y, x), c - A @ y

    def lp_certificate(lp, chosen) -> bool:
        """An exact dual solution near the float one proves the node cannot improve."""
        sets, A, c, y, _ = lp
        # an item's dual is capped by its cheapest set
        cap = np.full(len(y), np.inf)
        for r in range(len(sets)):
            idx = A.indices[A.indptr[r]:A.indptr[r + 1]]
            cap[idx] = np.minimum(cap[idx], c[r])
        L = len(key_list)
        Ay = A @ y
        dense = A.toarray()

        def tight_rows(support):
            # independent tight rows, kept in reduced form for the rank test
            basis, rows, rhs = [], [], []
            for r in np.argsort((c - Ay) / c):
                if len(rows) == len(support) or c[r] - Ay[r] > 1e-9 * c[r]:
                    break
                v = [Fraction(int(dense[r, j])) for j in support]
                for piv, bv in basis:
                    if v[piv]:
                        f = v[piv]
                        v = [a - f * b for a, b in zip(v, bv)]
                piv = next((t for t, a in enumerate(v) if a), None)
                if piv is None:
                    continue
                v = [a / v[piv] for a in v]
                basis.append((piv, v))
                rows.append([Fraction(int(dense[r, j])) for j in support])
                e = [Fraction(0)] * L
                e[key_index[keys[sets[r]]]] = Fraction(1)
                rhs.append(e)
                if len(rows) == len(support):
                    break
            return rows, rhs

        # noise-level duals can leave the support rank deficient
        for rel in (1e-10, 1e-6, 1e-3):
            support = [j for j in range(len(y)) if y[j] > rel * cap[j]]
            rows, rhs = tight_rows(support)
            if len(rows) == len(support):
                break
        else:
            return False
        k = len(support)
        pos = {j: t for t, j in enumerate(support)}
        # Gauss-Jordan on [rows | rhs]
        M = [rows[i] + rhs[i] for i in range(k)]
        for col_ in range(k):
            piv = next(i for i in range(col_, k) if M[i][col_])
            M[col_], M[piv] = M[piv], M[col_]
            p = M[col_][col_]
            M[col_] = [a / p for a in M[col_]]
            for i in range(k):
                if i != col_ and M[i][col_]:
                    f = M[i][col_]
                    M[i] = [a - f * b for a, b in zip(M[i], M[col_])]
        Y = [M[t][k:] for t in range(k)]
        yf = [sum(float(a) * w for a, w in zip(v, key_cost)) for v in Y]
        lower = [sum(col_) for col_ in zip(*Y)] if Y else [0] * L
        for s in wrap(chosen):
            lower[key_index[keys[s]]] += 1
        # the value is checked first; feasibility only matters if it is enough
        if not best.reaches(exact(counts_of(lower))):
            return False

        def nonneg(vec, approx, scale):
            if approx > 1e-12 * scale:
                return True
            if not any(vec):
                return True
            return exact(counts_of(vec)).sign() >= 0

        for t in range(k):
            if not nonneg(Y[t], yf[t], cap[support[t]]):
                return False
        for r in range(len(sets)):
            members = [pos[j] for j in A.indices[A.indptr[r]:A.indptr[r + 1]] if j in pos]
            vec = [Fraction(0)] * L
            vec[key_index[keys[sets[r]]]] += 1
            approx = c[r]
            for t in members:
                vec = [a - b for a, b in zip(vec, Y[t])]
                approx -= yf[t]
            if not nonneg(vec, approx, c[r]):
                return False
        return True

    def lp_rounding(covered: int, lp) -> None:
        sets, _, _, _, x = lp
        picked = []
        for r in np.argsort(-x):
            if x[r] <= 1e-9 or covered == rest:
                break
            s = sets[r]
            if masks[s] & ~covered:
                picked.append(s)
                covered |= masks[s]
        while covered != rest:
            s = min((s for s in sets if masks[s] & ~covered),
                    key=lambda s: costs[s] / (masks[s] & ~covered).bit_count())
            picked.append(s)
            covered |= masks[s]
        # drop sets whose items are all covered twice, last picked first
        times: dict = {}
        for s in picked:
            for it in _bits(masks[s]):
                times[it] = times.get(it, 0) + 1
        for s in list(reversed(picked)):
            its = list(_bits(masks[s]))
            if all(times[it] > 1 for it in its):
                picked.remove(s)
                for it in its:
                    times[it] -= 1
        best.offer(base + sum(costs[s] for s in picked), wrap(picked))

    def exact_less(u, v) -> bool:
        d = [a - b for a, b in zip(u, v)]
        return any(d) and exact(counts_of(d)).sign() < 0

    def exact_dual(covered: int, banned: int):
        # the same ascent with slacks kept as integer combinations of key costs
        slack: dict = {}
        fslack: dict = {}
        total = [0] * len(key_list)
        for it in dual_order:
            if covered >> it & 1:
                continue
            ss = [s for s in cand[it] if not banned >> s & 1]
            vals = [fslack.get(s, costs[s]) for s in ss]
            lo = min(vals)
            ties = [s for s, v in zip(ss, vals) if v <= lo + TIE * max(abs(lo), costs[s])]
            arg = ties[0]
            for s in ties[1:]:
                if exact_less(slack.get(s) or unit(s), slack.get(arg) or unit(arg)):
                    arg = s
            y = slack.get(arg) or unit(arg)
            if not any(y) or exact(counts_of(y)).sign() <= 0:
                continue
            total = [a + b for a, b in zip(total, y)]
            yf = fslack.get(arg, costs[arg])
            for s in ss:
                slack[s] = [a - b for a, b in zip(slack.get(s) or unit(s), y)]
                fslack[s] = fslack.get(s, costs[s]) - yf
        return total

    def settled(chosen: list, covered: int, banned: int) -> bool:
        vec = exact_dual(covered, banned)
        for s in wrap(chosen):
            vec[key_index[keys[s]]] += 1
        return best.reaches(exact(counts_of(vec)))

    def room(chosen: list, cost: float) -> float:
        # how far below the incumbent the rest of this branch must come in;
        # the exact difference keeps its precision when the incumbent is
        # huge and the open subproblem tiny
        if exact is None:
            return best.cost - cost
        d = [a - b for a, b in zip(vector_of(best.solution), vector_of(wrap(chosen)))]
        return exact(counts_of(d)).to_float() if any(d) else 0.0

    def beaten(bound: float, gap: float) -> bool:
        if exact is None:
            # float ties cannot improve the answer
            return bound >= gap - TIE * best.cost
        return gap <= 0 or bound * (1 - TIE) >= gap

    def close(bound: float, gap: float) -> bool:
        return exact is not None and bound >= gap * (1 - TIE)

    # sets by decreasing cost, with prefix masks: the sets too dear for a gap
    by_cost = sorted(live_sets, key=lambda s: -costs[s])
    dear = [0]
    for s in by_cost:
        dear.append(dear[-1] | 1 << s)

    def too_dear(gap: float) -> int:
        lo, hi = 0, len(by_cost)
        while lo < hi:
            mid = (lo + hi) // 2
            if beaten(costs[by_cost[mid]], gap):
                lo = mid + 1
            else:
                hi = mid
        return dear[lo]

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000))

    def dfs(covered: int, chosen: list, banned: int, cost: float):
        if covered == rest:
            best.offer(cost, wrap(chosen))
            return
        gap = room(chosen, cost)
        banned |= too_dear(gap)
        bound = dual_bound(covered, banned)
        if beaten(bound, gap):
            return
        if close(bound, gap) and settled(chosen, covered, banned):
            return
        if (rest & ~covered).bit_count() >= LP_ITEMS:
            lp = lp_relaxation(covered, banned)
            if lp is not None:
                if not chosen:
                    lp_rounding(covered, lp[1])
                    gap = room(chosen, cost)
                bound = max(bound, lp[0])
                if beaten(bound, gap):
                    return
                # reduced cost fixing: a set whose reduced cost alone closes
                # the gap cannot be in a better solution below this node
                for s, d in zip(lp[1][0], lp[2]):
                    if beaten(lp[0] + d, gap):
                        banned |= 1 << s
                if close(bound, gap) and lp_certificate(lp[1], chosen):
                    return
        options = None
        for it, ss in cand.items():
            if covered >> it & 1:
                continue
            ss = [s for s in ss if not banned >> s & 1]
            if options is None or len(ss) < len(options):
                options = ss
                if len(ss) <= 1:
                    break
        # sibling branches exclude the sets tried before them
        for s in options:
            chosen.append(s)
            dfs(covered | masks[s], chosen, banned, cost + costs[s])
            chosen.pop()
            banned |= 1 << s

    try:
        dfs(0, [], 0, base)
    finally:
        sys.setrecursionlimit(limit)
    return list(best.solution)


def _phi(t: float) -> float:
    return -t * math.log(t) if t > 0 else 0.0


def min_entropy_assignment(
    masses: Sequence[float], candidates: Sequence[Sequence[int]]
) -> tuple:
    """Minimise the Shannon entropy of class masses over item-to-group assignments.

    Returns ``(entropy, {item: group})``.  Zero-mass items go to their first
    candidate.  The bound uses concavity: the remaining mass placed into a
    single class is the cheapest completion of the relaxed problem.
    """
    live = sorted((i for i in range(len(masses)) if masses[i] > 0), key=lambda i: (-masses[i], i))
    suffix = [0.0] * (len(live) + 1)
    for t in range(len(live) - 1, -1, -1):
        suffix[t] = suffix[t + 1] + masses[live[t]]

    best_val = math.inf
    best_assign: dict = {}

    # greedy incumbent: join the heaviest compatible class
    classes: dict = {}
    greedy = {}
    for i in live:
        g = max(candidates[i], key=lambda g: (classes.get(g, 0.0), -g))
        classes[g] = classes.get(g, 0.0) + masses[i]
        greedy[i] = g
    best_val = sum(_phi(m) for m in classes.values())
    best_assign = dict(greedy)

    classes = {}
    assign: dict = {}

    def bound(rest: float) -> float:
        base = sum(_phi(m) for m in classes.values())
        if rest <= 0:
            return base
        lb = base + _phi(rest)
        for m in classes.values():
            lb = min(lb, base - _phi(m) + _phi(m + rest))
        return lb

    def dfs(t: int):
        nonlocal best_val, best_assign
        if t == len(live):
            val = sum(_phi(m) for m in classes.values())
            if val < best_val - 1e-15:
                best_val, best_assign = val, dict(assign)
            return
        if bound(suffix[t]) >= best_val - 1e-15:
            return
        i = live[t]
        opts = sorted(candidates[i], key=lambda g: (-classes.get(g, 0.0), g))
        for g in opts:
            classes[g] = classes.get(g, 0.0) + masses[i]
            assign[i] = g
            dfs(t + 1)
            classes[g] -= masses[i]
            if classes[g] <= 0:
                del classes[g]
            del assign[i]

    dfs(0)
    for i in range(len(masses)):
        if i not in best_assign:
            best_assign[i] = min(candidates[i])
    return max(best_val, 0.0), best_assign
