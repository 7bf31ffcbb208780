"""Optimized certainty equivalents on finite scenario spaces.

For a normalized utility ``v`` (see :mod:`riskhull.utility`) the induced
risk measure of a scenario vector ``X`` is

    rho_v(X) = inf_lambda { lambda + E[ v(X + lambda) ] }.

Normalization makes ``rho_v`` a convex, nonincreasing, cash-additive risk
measure with ``rho_v(X) >= -E(X)`` and ``rho_v(c) = -c`` on constants.
Its Fenchel conjugate is the scenario-wise sum of utility conjugates on
the hyperplane ``E(X*) = -1`` and +inf off it, and its subdifferential at
``X`` is the set of vectors picking a utility subgradient atom by atom at
``X + lambda_bar`` subject to that same mean constraint; both are
implemented in closed form here, with the minimizing shift ``lambda_bar``
coming from the exact-subgradient scalar solver.

Three classical specializations get dedicated entry points with
independent closed forms: conditional value-at-risk (two-slope utility),
the entropic risk measure (exponential utility, evaluated through a
max-shifted log-sum-exp), and the worst-case measure (indicator utility).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ConvergenceError, InputError
from .intervals import Interval, weighted_sum
from .solver import ScalarConvexProblem, minimize_scalar_convex
from .space import ProbSpace, expectation, var_beta
from .utility import (
    IndicatorNonneg,
    TwoSlope,
    UtilityFunction,
    check_attainment_condition,
    check_normalization,
)

_INF = math.inf

# Mean constraints on dual vectors are enforced to this absolute tolerance.
MEAN_TOL = 1e-9

# Kink detection width used when the minimizing shift is known only to
# solver tolerance; see UtilityFunction.subdiff.
SUBDIFF_SNAP = 1e-8


@dataclass(frozen=True)
class OCEResult:
    """Value and minimizer information for one certainty-equivalent
    evaluation.  ``minimizer_interval`` is the detected argmin set of the
    shift (a point when the minimizer is unique); ``lambda_bar`` is its
    midpoint."""

    value: float
    lambda_bar: float
    attained: bool
    minimizer_interval: Interval


@dataclass(frozen=True)
class SubdiffBox:
    """Subdifferential of ``rho_v`` at a point: per-atom closed intervals
    combined with the shared constraint ``E(X*) = -1``.

    A vector belongs to the subdifferential iff every component lies in
    its atom's interval and the weighted mean equals -1.
    """

    intervals: Tuple[Interval, ...]
    lambda_bar: float


def _objective(space: ProbSpace, v: UtilityFunction, x: np.ndarray):
    w = space.weights

    def phi(lam: float) -> float:
        total = lam
        for wi, xi in zip(w, x):
            vi = v.value(xi + lam)
            if vi == _INF:
                return _INF
            total += wi * vi
        return total

    def dphi(lam: float) -> Interval:
        parts = [v.subdiff(xi + lam) for xi in x]
        return weighted_sum(parts, w).shift(1.0)

    dom_lo = v.domain_left()
    lo = -_INF if dom_lo == -_INF else dom_lo - float(np.min(x))
    return phi, dphi, lo


def oce_value(
    space: ProbSpace, v: UtilityFunction, x, *, tol: float = 1e-10
) -> OCEResult:
    """Evaluate ``rho_v(X)`` by minimizing the shift objective.

    Rejects non-normalized utilities.  The argmin set is localized
    exactly when flat (piecewise-linear utilities); the reported
    ``lambda_bar`` is its midpoint.
    """
    x = space.vector(x)
    if not check_normalization(v):
        raise InputError("utility is not normalized: need v(0)=0 and -1 in subdiff v(0)")
    phi, dphi, lo = _objective(space, v, x)
    res = minimize_scalar_convex(ScalarConvexProblem(phi, dphi, lo=lo), tol=tol)
    return OCEResult(
        value=res.value,
        lambda_bar=res.argmin,
        attained=res.attained and not res.diverged,
        minimizer_interval=res.flat,
    )


def oce_conjugate(
    space: ProbSpace, v: UtilityFunction, xstar, *, tol_mean: float = MEAN_TOL
) -> float:
    """Conjugate of ``rho_v``: ``E(v*(X*))`` when ``E(X*) = -1`` (within
    ``tol_mean``), +inf otherwise."""
    xs = space.vector(xstar)
    if abs(expectation(space, xs) + 1.0) > tol_mean:
        return _INF
    total = 0.0
    for wi, si in zip(space.weights, xs):
        c = v.conjugate(si)
        if c == _INF:
            return _INF
        total += wi * c
    return total


def oce_subdiff(
    space: ProbSpace,
    v: UtilityFunction,
    x,
    *,
    tol: float = 1e-10,
    snap: float = SUBDIFF_SNAP,
) -> SubdiffBox:
    """Subdifferential box of ``rho_v`` at ``X``.

    Requires the attainment condition on the recession function of ``v``
    (no asymptotic slope equal to -1), under which the shift minimum is
    attained and the atomwise description is exact.  Evaluation of the
    utility subdifferential snaps to kinks within ``snap`` to absorb
    solver tolerance in the minimizing shift; the resulting membership
    set does not depend on which minimizer is used.
    """
    x = space.vector(x)
    if not check_attainment_condition(v):
        raise InputError(
            "attainment condition fails: a recession slope of the utility equals -1"
        )
    res = oce_value(space, v, x, tol=tol)
    intervals = tuple(v.subdiff(float(xi) + res.lambda_bar, snap=snap) for xi in x)
    return SubdiffBox(intervals=intervals, lambda_bar=res.lambda_bar)


def subdiff_contains(
    space: ProbSpace,
    box: SubdiffBox,
    xstar,
    *,
    tol: float = MEAN_TOL,
    tol_mean: float = MEAN_TOL,
) -> bool:
    """Whether ``X*`` lies in the subdifferential box (componentwise, with
    ``tol`` slack at finite interval endpoints) and has mean -1."""
    xs = space.vector(xstar)
    if abs(expectation(space, xs) + 1.0) > tol_mean:
        return False
    return all(iv.contains(float(s), tol=tol) for iv, s in zip(box.intervals, xs))


def subdiff_nonempty(space: ProbSpace, box: SubdiffBox, *, tol_mean: float = MEAN_TOL) -> bool:
    """Whether the box meets the hyperplane ``E(X*) = -1``.

    Because the box is a product of intervals, the reachable means form
    exactly the weighted interval sum, so nonemptiness is a single
    extended-real interval membership (exact, no sentinels).
    """
    if any(iv.is_empty for iv in box.intervals):
        return False
    reach = weighted_sum(list(box.intervals), space.weights)
    return reach.contains(-1.0, tol=tol_mean)


# ---------------------------------------------------------------------------
# Specializations
# ---------------------------------------------------------------------------


def cvar(space: ProbSpace, x, beta: float, *, tol: float = 1e-10) -> OCEResult:
    """Conditional value-at-risk at level ``beta`` via the two-slope
    utility with slopes ``(0, -1/beta)``.

    Verifies that the shift objective evaluated at the value-at-risk
    attains the minimum: the quantile is always a minimizer.
    """
    x = space.vector(x)
    if not (0.0 < beta < 1.0):
        raise InputError("beta must lie strictly between 0 and 1")
    v = TwoSlope(0.0, -1.0 / beta)
    res = oce_value(space, v, x, tol=tol)
    lam_var = var_beta(space, x, beta)
    phi, _, _ = _objective(space, v, x)
    at_var = phi(lam_var)
    if abs(at_var - res.value) > 1e-9 * max(1.0, abs(res.value)):
        raise ConvergenceError(
            f"quantile minimizer check failed: phi(VaR)={at_var!r} vs value={res.value!r}"
        )
    return res


def cvar_subdiff(space: ProbSpace, x, beta: float) -> SubdiffBox:
    """Subdifferential box of CVaR built at the value-at-risk shift:
    slope -1/beta strictly below the quantile, the full interval
    [-1/beta, 0] on it, and 0 strictly above."""
    x = space.vector(x)
    if not (0.0 < beta < 1.0):
        raise InputError("beta must lie strictly between 0 and 1")
    v = TwoSlope(0.0, -1.0 / beta)
    lam = var_beta(space, x, beta)
    intervals = tuple(v.subdiff(float(xi) + lam) for xi in x)
    return SubdiffBox(intervals=intervals, lambda_bar=lam)


def entropic(space: ProbSpace, x) -> OCEResult:
    """Entropic risk measure ``log E(exp(-X))``, computed with a
    max-shifted log-sum-exp; the unique minimizing shift equals the
    value itself."""
    x = space.vector(x)
    m = float(np.min(x))
    val = -m + math.log(float(space.weights @ np.exp(-(x - m))))
    return OCEResult(
        value=val, lambda_bar=val, attained=True, minimizer_interval=Interval.point(val)
    )


def entropic_gradient(space: ProbSpace, x) -> np.ndarray:
    """Gradient ``-exp(-X)/E(exp(-X))`` of the entropic measure; the
    unique subgradient, with mean exactly -1."""
    x = space.vector(x)
    m = float(np.min(x))
    u = np.exp(-(x - m))
    return -u / float(space.weights @ u)


def worst_case(space: ProbSpace, x) -> OCEResult:
    """Worst-case measure ``-ess inf X`` (indicator utility); the shift
    minimum sits exactly at the domain edge ``-min X``."""
    x = space.vector(x)
    lam = -float(np.min(x))
    return OCEResult(
        value=lam, lambda_bar=lam, attained=True, minimizer_interval=Interval.point(lam)
    )


def worst_case_subdiff(space: ProbSpace, x) -> SubdiffBox:
    """Subdifferential box of the worst-case measure: ``(-inf, 0]`` on
    atoms attaining the minimum, ``{0}`` elsewhere.  On a finite space
    some atom always attains the minimum, so the box is never empty."""
    x = space.vector(x)
    v = IndicatorNonneg()
    lam = -float(np.min(x))
    intervals = tuple(v.subdiff(float(xi) + lam) for xi in x)
    return SubdiffBox(intervals=intervals, lambda_bar=lam)
