"""Closed intervals on the extended real line.

Subdifferentials of convex functions on R are closed intervals whose
endpoints may be infinite.  This module gives them a small exact algebra.
Infinite endpoints are ``math.inf`` used symbolically, never large finite
sentinels, and arithmetic that would form ``(+inf) + (-inf)`` raises
instead of silently producing NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


def ext_add(a: float, b: float) -> float:
    """Extended-real addition.  Raises on ``(+inf) + (-inf)``."""
    if math.isnan(a) or math.isnan(b):
        raise ValueError("NaN is not an extended real")
    if math.isinf(a) and math.isinf(b) and (a > 0) != (b > 0):
        raise ValueError("(+inf) + (-inf) is undefined")
    return a + b


def ext_sum(terms: Iterable[float]) -> float:
    """Extended-real sum of finitely many terms, via :func:`ext_add`."""
    total = 0.0
    for t in terms:
        total = ext_add(total, t)
    return total


@dataclass(frozen=True)
class Interval:
    """A closed interval ``[lo, hi]`` with optionally infinite endpoints.

    The empty interval is the canonical reversed pair ``(+inf, -inf)``;
    any other ``lo > hi`` is rejected at construction.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi and not (lo == math.inf and hi == -math.inf):
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def empty(cls) -> "Interval":
        return cls(math.inf, -math.inf)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float, tol: float = 0.0) -> bool:
        """Whether ``x`` lies in the interval, widened by ``tol`` at each
        finite endpoint."""
        if math.isnan(x):
            raise ValueError("membership of NaN is undefined")
        if self.is_empty:
            return False
        lo = self.lo if math.isinf(self.lo) else self.lo - tol
        hi = self.hi if math.isinf(self.hi) else self.hi + tol
        return lo <= x <= hi

    def intersect(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return Interval.empty()
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return Interval.empty()
        return Interval(lo, hi)

    def shift(self, c: float) -> "Interval":
        if self.is_empty:
            return self
        return Interval(ext_add(self.lo, c), ext_add(self.hi, c))

    def scale(self, c: float) -> "Interval":
        """Image under multiplication by ``c > 0``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.is_empty:
            return self
        return Interval(c * self.lo, c * self.hi)

    def hull(self, other: "Interval") -> "Interval":
        """Smallest interval containing both."""
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def clamp(self, x: float) -> float:
        """Nearest point of the interval to ``x``.  Undefined when empty."""
        if self.is_empty:
            raise ValueError("cannot clamp into an empty interval")
        return min(max(x, self.lo), self.hi)


def weighted_sum(intervals: Sequence[Interval], weights: Sequence[float]) -> Interval:
    """The interval ``{sum_i w_i x_i : x_i in I_i}`` for positive weights.

    Exact on extended reals: an infinite endpoint propagates, and the two
    endpoint sums can never mix opposite infinities.
    """
    if len(intervals) != len(weights):
        raise ValueError("length mismatch between intervals and weights")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be strictly positive")
    if any(iv.is_empty for iv in intervals):
        return Interval.empty()
    lo = ext_sum(w * iv.lo for w, iv in zip(weights, intervals))
    hi = ext_sum(w * iv.hi for w, iv in zip(weights, intervals))
    return Interval(lo, hi)
