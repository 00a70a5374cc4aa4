"""Stable log-domain accumulation and exact sums of exponentials.

Pressure sums look like ``sum_x exp(n * E(x))``.  With rational energies the
exponents are rational, so the sum is kept symbolically as a finite map
``exponent -> coefficient``; comparisons fall back on high precision
arithmetic only when two symbolic sums differ.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import mpmath
import numpy as np
from scipy.special import logsumexp as _scipy_logsumexp

__all__ = ["ExpSum", "logsumexp", "to_mpf"]


def logsumexp(values) -> float:
    """``log(sum(exp(values)))`` without overflow; ``-inf`` for an empty input."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    return float(_scipy_logsumexp(arr))


def to_mpf(x):
    if isinstance(x, Rational) and not isinstance(x, int):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _normalize(x):
    # exact numbers stay exact; integral floats are left as floats
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


class ExpSum:
    """Finite sum ``sum_k c_k * exp(q_k)`` with exact bookkeeping.

    Exponents and coefficients may be ints, Fractions or floats.  Equality is
    structural; ordering is decided numerically with adaptive precision.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for q, c in items:
            q = _normalize(q)
            acc[q] = acc.get(q, 0) + c
        self._terms = tuple(
            sorted(((q, _normalize(c)) for q, c in acc.items() if c != 0), key=lambda t: t[0])
        )

    @classmethod
    def exp(cls, exponent, coeff=1) -> "ExpSum":
        return cls({exponent: coeff})

    @classmethod
    def zero(cls) -> "ExpSum":
        return cls()

    @classmethod
    def total(cls, exponents: Iterable) -> "ExpSum":
        acc: dict = {}
        for q in exponents:
            q = _normalize(q)
            acc[q] = acc.get(q, 0) + 1
        return cls(acc)

    @property
    def terms(self) -> tuple:
        return self._terms

    def is_exact(self) -> bool:
        return all(
            not isinstance(q, float) and not isinstance(c, float) for q, c in self._terms
        )

    def __bool__(self):
        return bool(self._terms)

    def __add__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        return ExpSum(list(self._terms) + list(other._terms))

    def __neg__(self):
        return ExpSum((q, -c) for q, c in self._terms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExpSum):
            return ExpSum(
                (q1 + q2, c1 * c2) for q1, c1 in self._terms for q2, c2 in other._terms
            )
        if isinstance(other, (int, Fraction, float)):
            return ExpSum((q, c * other) for q, c in self._terms)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = ExpSum({0: 1})
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, delta) -> "ExpSum":
        """Multiply by ``exp(delta)``."""
        return ExpSum((q + delta, c) for q, c in self._terms)

    def __eq__(self, other):
        if isinstance(other, ExpSum):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(self._terms)

    def log(self) -> float:
        if not self._terms:
            return -math.inf
        qs = np.array([float(q) for q, _ in self._terms])
        cs = np.array([float(c) for _, c in self._terms])
        if np.any(cs < 0):
            raise ValueError("log of an ExpSum with negative coefficients")
        return float(_scipy_logsumexp(qs, b=cs))

    def log_mp(self, dps: int = 50):
        with mpmath.workdps(dps):
            if not self._terms:
                return mpmath.ninf
            top = max(to_mpf(q) for q, _ in self._terms)
            s = mpmath.fsum(to_mpf(c) * mpmath.exp(to_mpf(q) - top) for q, c in self._terms)
            return top + mpmath.log(s)

    def sign(self) -> int:
        """Sign of the represented real number."""
        if not self._terms:
            return 0
        if all(c > 0 for _, c in self._terms):
            return 1
        if all(c < 0 for _, c in self._terms):
            return -1
        for dps in (40, 80, 160, 320):
            with mpmath.workdps(dps):
                top = max(to_mpf(q) for q, _ in self._terms)
                parts = [to_mpf(c) * mpmath.exp(to_mpf(q) - top) for q, c in self._terms]
                val = mpmath.fsum(parts)
                scale = mpmath.fsum(abs(p) for p in parts)
                if abs(val) > scale * mpmath.mpf(10) ** (-(dps - 10)):
                    return 1 if val > 0 else -1
        return 0

    def to_float(self) -> float:
        """Nearest float, with full relative accuracy even under cancellation."""
        if not self._terms:
            return 0.0
        for dps in (40, 80, 160, 320):
            with mpmath.workdps(dps):
                parts = [to_mpf(c) * mpmath.exp(to_mpf(q)) for q, c in self._terms]
                val = mpmath.fsum(parts)
                scale = mpmath.fsum(abs(p) for p in parts)
                if abs(val) > scale * mpmath.mpf(10) ** (-(dps - 20)):
                    return float(val)
        return 0.0

    def compare(self, other: "ExpSum") -> int:
        if self == other:
            return 0
        return (self - other).sign()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __repr__(self):
        return f"ExpSum({self.to_str()})"

    def to_str(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*exp({q})" for q, c in self._terms)
