"""Catalog of normalized utility (loss) functions.

Every utility ``v`` here is proper, convex, lower semicontinuous and
nonincreasing on the real line.  The normalization that makes the induced
certainty-equivalent risk measure sensible is

    v(0) = 0   and   -1 in the subdifferential of v at 0,

which is equivalent to ``v(0) = 0`` together with ``v(t) + t >= 0`` for
all ``t``.  :func:`check_normalization` verifies both forms against each
other.

Each variant carries exact closed forms for the pointwise value, the
Fenchel conjugate ``v*(s) = sup_t (s t - v(t))``, the subdifferential
(as an :class:`~riskhull.intervals.Interval`, possibly empty or
unbounded), and the recession function

    v_inf(d) = lim_{t -> inf} v(x + t d) / t   (any x in dom v).

The attainment condition used by the certainty-equivalent minimization,
``{d : v_inf(d) = -d} = {0}``, reduces by positive homogeneity to
``v_inf(1) != -1`` and ``v_inf(-1) != 1``; :func:`check_attainment_condition`
decides it exactly from the recession slopes.

Because ``v`` is nonincreasing, its effective domain is an interval
unbounded to the right; a bounded-left domain (as for the indicator of
the nonnegative half-line) is supported, and in
:class:`PiecewiseLinear` it is encoded by a leading ``-inf`` slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InputError
from .intervals import Interval

_INF = math.inf


class UtilityFunction:
    """Base interface; concrete variants implement the closed forms."""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def conjugate(self, s: float) -> float:
        raise NotImplementedError

    def subdiff(self, t: float, snap: float = 0.0) -> Interval:
        """Subdifferential at ``t``.

        ``snap`` widens kink detection: points within ``snap`` of a kink
        report the full interval at the kink.  Callers holding a minimizer
        known only to solver tolerance use this to keep membership tests
        stable; the default is exact evaluation.
        """
        raise NotImplementedError

    def recession(self, d: float) -> float:
        raise NotImplementedError

    def domain_left(self) -> float:
        """Left endpoint of the effective domain (``-inf`` if unbounded)."""
        return -_INF

    def conjugate_domain(self) -> Interval:
        """Closure of the effective domain of the conjugate."""
        raise NotImplementedError


@dataclass(frozen=True)
class TwoSlope(UtilityFunction):
    """Piecewise-linear utility with slope ``gamma2`` on t <= 0 and
    ``gamma1`` on t > 0, for ``gamma2 < -1 < gamma1 <= 0``.

    ``gamma1 = 0, gamma2 = -1/beta`` reproduces the conditional
    value-at-risk at level ``beta``.
    """

    gamma1: float
    gamma2: float

    def __post_init__(self) -> None:
        g1, g2 = float(self.gamma1), float(self.gamma2)
        if not (g2 < -1.0 < g1 <= 0.0):
            raise InputError(
                f"two-slope utility needs gamma2 < -1 < gamma1 <= 0, got ({g1}, {g2})"
            )
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    def value(self, t: float) -> float:
        return self.gamma2 * t if t <= 0 else self.gamma1 * t

    def conjugate(self, s: float) -> float:
        return 0.0 if self.gamma2 <= s <= self.gamma1 else _INF

    def subdiff(self, t: float, snap: float = 0.0) -> Interval:
        if t < -snap:
            return Interval.point(self.gamma2)
        if t > snap:
            return Interval.point(self.gamma1)
        return Interval(self.gamma2, self.gamma1)

    def recession(self, d: float) -> float:
        if d == 0:
            return 0.0
        return self.gamma2 * d if d < 0 else self.gamma1 * d

    def conjugate_domain(self) -> Interval:
        return Interval(self.gamma2, self.gamma1)


@dataclass(frozen=True)
class Exponential(UtilityFunction):
    """``v(t) = exp(-t) - 1``; induces the entropic risk measure."""

    def value(self, t: float) -> float:
        try:
            return math.exp(-t) - 1.0
        except OverflowError:
            return _INF  # float overflow; the true value merely exceeds 1.8e308

    def conjugate(self, s: float) -> float:
        if s > 0:
            return _INF
        if s == 0:
            return 1.0  # 0 log 0 = 0 convention
        return -s * math.log(-s) + s + 1.0

    def subdiff(self, t: float, snap: float = 0.0) -> Interval:
        try:
            g = -math.exp(-t)
        except OverflowError:
            g = -_INF
        return Interval.point(g)

    def recession(self, d: float) -> float:
        return 0.0 if d >= 0 else _INF

    def conjugate_domain(self) -> Interval:
        return Interval(-_INF, 0.0)


@dataclass(frozen=True)
class IndicatorNonneg(UtilityFunction):
    """Indicator of the nonnegative half-line (0 there, +inf below);
    induces the worst-case risk measure."""

    def value(self, t: float) -> float:
        return 0.0 if t >= 0 else _INF

    def conjugate(self, s: float) -> float:
        return 0.0 if s <= 0 else _INF

    def subdiff(self, t: float, snap: float = 0.0) -> Interval:
        if t < -snap:
            return Interval.empty()
        if t > snap:
            return Interval.point(0.0)
        return Interval(-_INF, 0.0)

    def recession(self, d: float) -> float:
        return 0.0 if d >= 0 else _INF

    def domain_left(self) -> float:
        return 0.0

    def conjugate_domain(self) -> Interval:
        return Interval(-_INF, 0.0)


@dataclass(frozen=True)
class PiecewiseLinear(UtilityFunction):
    """Convex piecewise-linear nonincreasing utility.

    ``slopes[i]`` applies on the i-th piece, with ``breaks`` the sorted
    kink locations (``len(slopes) == len(breaks) + 1``).  Slopes must be
    nondecreasing and nonpositive.  A leading ``-inf`` slope encodes an
    effective domain bounded on the left at ``breaks[0]``.  The value is
    anchored by ``v(0) = 0``.

    Structural validity is enforced here; whether the utility is
    normalized (``-1`` straddled at 0) is a separate, checkable property.
    """

    breaks: Tuple[float, ...]
    slopes: Tuple[float, ...]

    def __post_init__(self) -> None:
        breaks = tuple(float(b) for b in self.breaks)
        slopes = tuple(float(s) for s in self.slopes)
        if len(slopes) != len(breaks) + 1:
            raise InputError("need exactly one more slope than breakpoints")
        if any(not math.isfinite(b) for b in breaks):
            raise InputError("breakpoints must be finite")
        if any(breaks[i] >= breaks[i + 1] for i in range(len(breaks) - 1)):
            raise InputError("breakpoints must be strictly increasing")
        if any(math.isnan(s) for s in slopes) or slopes and slopes[-1] == _INF:
            raise InputError("slopes must not be NaN or +inf")
        if any(s == -_INF for s in slopes[1:]):
            raise InputError("only the leading slope may be -inf")
        if any(slopes[i] > slopes[i + 1] for i in range(len(slopes) - 1)):
            raise InputError("slopes must be nondecreasing (convexity)")
        if slopes[-1] > 0:
            raise InputError("slopes must be nonpositive (monotonicity)")
        if slopes[0] == -_INF:
            if not breaks or breaks[0] > 0:
                raise InputError("a -inf leading slope needs a breakpoint at or below 0")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "_break_values", self._values_at_breaks())

    def _values_at_breaks(self) -> Tuple[float, ...]:
        # Integrate the slope step function from the anchor v(0) = 0.
        breaks, slopes = self.breaks, self.slopes
        if not breaks:
            return ()
        vals = [0.0] * len(breaks)
        j = int(np.searchsorted(breaks, 0.0, side="right"))
        # value at break j-1 (first at or below 0), walking left from 0
        anchor = 0.0
        pos = 0.0
        for i in range(j - 1, -1, -1):
            anchor -= slopes[i + 1] * (pos - breaks[i])
            vals[i] = anchor
            pos = breaks[i]
        anchor, pos = 0.0, 0.0
        for i in range(j, len(breaks)):
            anchor += slopes[i] * (breaks[i] - pos)
            vals[i] = anchor
            pos = breaks[i]
        return tuple(vals)

    def _segment(self, t: float) -> int:
        """Index of the slope applying on the open piece containing t."""
        return int(np.searchsorted(self.breaks, t, side="left"))

    def value(self, t: float) -> float:
        breaks, slopes, vals = self.breaks, self.slopes, self._break_values
        if not breaks:
            return slopes[0] * t
        if t < breaks[0]:
            if slopes[0] == -_INF:
                return _INF
            return vals[0] + slopes[0] * (t - breaks[0])
        if t >= breaks[-1]:
            return vals[-1] + slopes[-1] * (t - breaks[-1])
        i = self._segment(t)
        if t == breaks[i]:
            return vals[i]
        return vals[i - 1] + slopes[i] * (t - breaks[i - 1])

    def subdiff(self, t: float, snap: float = 0.0) -> Interval:
        breaks, slopes = self.breaks, self.slopes
        if not breaks:
            return Interval.point(slopes[0])
        k = int(np.argmin(np.abs(np.asarray(breaks) - t)))
        if abs(breaks[k] - t) <= snap:
            return Interval(slopes[k], slopes[k + 1])
        if t < breaks[0]:
            return Interval.empty() if slopes[0] == -_INF else Interval.point(slopes[0])
        i = self._segment(t)
        return Interval.point(slopes[i])

    def conjugate(self, s: float) -> float:
        lo, hi = self.slopes[0], self.slopes[-1]
        if s < lo or s > hi:
            return _INF
        # The sup of s t - v(t) over a polyhedral v is attained at a kink
        # (or at the anchor 0 when there are none).
        best = 0.0  # candidate t = 0, where v vanishes
        for b, vb in zip(self.breaks, self._break_values):
            best = max(best, s * b - vb)
        return best

    def recession(self, d: float) -> float:
        if d == 0:
            return 0.0
        if d > 0:
            return self.slopes[-1] * d
        return _INF if self.slopes[0] == -_INF else self.slopes[0] * d

    def domain_left(self) -> float:
        return self.breaks[0] if self.slopes[0] == -_INF else -_INF

    def conjugate_domain(self) -> Interval:
        return Interval(self.slopes[0], self.slopes[-1])


def check_normalization(v: UtilityFunction, grid_radius: float = 50.0, grid_points: int = 401) -> bool:
    """True iff ``v(0) = 0`` and ``-1`` is a subgradient of ``v`` at 0.

    The equivalent characterization ``v(t) + t >= 0`` is scanned on a grid
    as a cross-check; a normalized utility can never fail it, so the scan
    only guards against inconsistent closed forms.
    """
    primary = abs(v.value(0.0)) <= 1e-12 and v.subdiff(0.0).contains(-1.0)
    if not primary:
        return False
    for t in np.linspace(-grid_radius, grid_radius, grid_points):
        if v.value(float(t)) + float(t) < -1e-9:
            return False
    return True


def check_attainment_condition(v: UtilityFunction) -> bool:
    """Whether ``{d : v_inf(d) = -d} = {0}``, decided from the recession
    slopes: equivalent to ``v_inf(1) != -1`` and ``v_inf(-1) != 1``."""
    return v.recession(1.0) != -1.0 and v.recession(-1.0) != 1.0
