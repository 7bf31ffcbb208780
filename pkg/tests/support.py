"""Shared generators and small independent oracles for the test suite."""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from riskhull import (
    Exponential,
    IndicatorNonneg,
    PiecewiseLinear,
    ProbSpace,
    SubdiffBox,
    TwoSlope,
)

# concrete utility variants exercised throughout; names are only labels
UTILITIES: Tuple[Tuple[str, object], ...] = (
    ("two_slope(0,-2)", TwoSlope(0.0, -2.0)),
    ("two_slope(-0.25,-4)", TwoSlope(-0.25, -4.0)),
    ("exponential", Exponential()),
    ("indicator_nonneg", IndicatorNonneg()),
    ("piecewise_linear", PiecewiseLinear(breaks=(-1.0, 1.0), slopes=(-3.0, -1.0, -0.2))),
)


def rand_space(rng: np.random.Generator, n_max: int = 8, n: Optional[int] = None) -> ProbSpace:
    m = n if n is not None else int(rng.integers(2, n_max + 1))
    w = rng.uniform(0.2, 1.0, size=m)
    return ProbSpace(w / w.sum())


def rand_vector(rng: np.random.Generator, space: ProbSpace, scale: float = 1.5) -> np.ndarray:
    return rng.normal(0.0, scale, size=space.n)


def box_member(space: ProbSpace, box: SubdiffBox, rng: np.random.Generator,
               iters: int = 80) -> Optional[np.ndarray]:
    """A point of the subdifferential box with mean exactly -1, or None.

    Starts from a random clamped selection and repairs the weighted mean
    along whatever slack the intervals leave; purely interval arithmetic,
    independent of the conjugate code paths.
    """
    w = space.weights
    lo = np.array([iv.lo for iv in box.intervals])
    hi = np.array([iv.hi for iv in box.intervals])
    if np.any(lo > hi):
        return None
    start = rng.normal(-1.0, 1.0, size=space.n)
    y = np.clip(start, np.where(np.isinf(lo), -1e6, lo), np.where(np.isinf(hi), 1e6, hi))
    for _ in range(iters):
        gap = -1.0 - float(w @ y)
        if abs(gap) <= 1e-13:
            return y
        if gap > 0:
            room = np.where(np.isinf(hi), 1e9, hi) - y
        else:
            room = np.where(np.isinf(lo), -1e9, lo) - y
        total = float(w @ room)
        if abs(total) < 1e-15:
            return None
        y = y + room * min(1.0, gap / total)
        y = np.clip(y, np.where(np.isinf(lo), -1e18, lo), np.where(np.isinf(hi), 1e18, hi))
    return y if abs(float(w @ y) + 1.0) <= 1e-10 else None


def refine_grid_1d(f, lo: float, hi: float, steps: int = 2001,
                   levels: int = 5) -> Tuple[float, float]:
    """Nested 1-d grid minimization; independent of every solver path.

    Refinement windows are clamped to the original interval so the
    reference value never comes from outside the stated domain.
    """
    lo0, hi0 = lo, hi
    best_x, best_v = lo, math.inf
    for _ in range(levels):
        xs = np.linspace(lo, hi, steps)
        vals = [f(float(t)) for t in xs]
        k = int(np.argmin(vals))
        if vals[k] < best_v:
            best_v, best_x = float(vals[k]), float(xs[k])
        cell = (hi - lo) / (steps - 1)
        lo = max(lo0, best_x - 2 * cell)
        hi = min(hi0, best_x + 2 * cell)
    return best_x, best_v


def nested_grid_min(f, lo: List[float], hi: List[float], steps: int = 41,
                    levels: int = 5) -> float:
    """Nested full-grid minimization in up to 3 dimensions.

    Re-grids jointly around the incumbent (span of six cells per side), so
    diagonal valleys of nonsmooth objectives cannot stall it the way
    coordinatewise polish can.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo0, hi0 = lo.copy(), hi.copy()
    dim = lo.size
    best_x, best_v = None, math.inf
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], steps) for i in range(dim)]
        for idx in np.ndindex(*(steps,) * dim):
            x = np.array([axes[i][idx[i]] for i in range(dim)])
            v = f(x)
            if v < best_v:
                best_v, best_x = float(v), x
        if best_x is None:
            return math.inf
        cell = (hi - lo) / (steps - 1)
        lo = np.maximum(lo0, best_x - 3.0 * cell)
        hi = np.minimum(hi0, best_x + 3.0 * cell)
    return best_v
