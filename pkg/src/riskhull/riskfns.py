"""Catalog of convex risk functions with exact conjugates and dual assemblies.

Seven descriptors are implemented on a finite weighted probability space:

======================  ==========================================  =========
descriptor              f(X)                                        flags
======================  ==========================================  =========
LpDeviation(p, c)       c‖X − E(X)‖_p − E(X)                        cash-inv
LpSemiDeviation(p, c)   c‖(X − E(X))_−‖_p − E(X)                    cash-inv
MeanLp(p, c)            (c/p)·E|X|^p − E(X)                         —
LpSemiMoment(p, c)      (1/c)·E[(X_−)^p]                            monotone
ExponentialRisk()       E(exp(−X)) − 1                              monotone
LogarithmicRisk()       E(−ln X) − 1 on X > 0, else +∞              monotone
InfDeviation(p)         ‖X − E(X)‖_p  (scale fixed to 1)            —
======================  ==========================================  =========

Conjugates come in two shapes.  The moment-type descriptors (MeanLp,
LpSemiMoment, ExponentialRisk, LogarithmicRisk) have finite closed forms on
an explicit domain.  The deviation-type descriptors (LpDeviation,
LpSemiDeviation, InfDeviation) have indicator conjugates: f*(X*) is 0 when a
witness Y* with ‖Y*‖_q ≤ 1 reproduces X* through an affine map, +∞
otherwise.  Witness existence is decided exactly: the affine map pins Y* up
to a scalar shift s·1, so feasibility reduces to a one-dimensional convex
minimization of ‖v + s·1‖_q — closed form for q ∈ {1, 2, ∞}, golden-section
otherwise.

``dual_problem`` assembles, per hull mode, the maximization
    sup ⟨X*, X⟩ − f*(X*)   over   X* ≤ 0 (monotone rows) ∩ ⟨X*, Π⟩ = −1,
either directly in X*-space (moment type) or in witness space with
X* = T(Y*) substituted (deviation type), in which case the constraint rows
become a q-ball, a halfspace family, and an affine row — exactly the
primitives the projection solver composes.

All inner products and norms are taken in the weighted geometry of the
space: ⟨u, v⟩ = Σ wᵢ uᵢ vᵢ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import xlogy

from .errors import InputError
from .solver import FeasibleSet, ScalarConvexProblem, minimize_scalar_convex
from .space import ProbSpace, expectation, norm_p, pairing

_INF = float("inf")

#: Hull modes understood by ``dual_problem`` and the hulls module.
MODES = ("combined", "monotone", "invariant")

#: Absolute slack on exact membership decisions inside conjugates
#: (mean constraints, ball radii, sign constraints).
MEMBER_TOL = 1e-9

#: Iterates of the logarithmic-risk dual are clamped to X* ≤ −LOG_CLAMP;
#: the objective tends to −∞ coordinatewise at the boundary, so the
#: supremum over the clamped set equals the supremum over X* < 0.
LOG_CLAMP = 1e-12


def _mean(space: ProbSpace, values: np.ndarray) -> float:
    """Weighted mean of an already-transformed array; tolerates +inf entries
    (a divergence probe can overflow exp/power transforms legitimately)."""
    return float(space.weights @ values)


def dual_exponent(p: float) -> float:
    """Hölder conjugate with the conventions 1 ↔ ∞."""
    if p == 1.0:
        return _INF
    if p == _INF:
        return 1.0
    return p / (p - 1.0)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise InputError(f"unknown hull mode {mode!r}; expected one of {MODES}")


def min_shift_norm(space: ProbSpace, v: np.ndarray, q: float,
                   s_max: Optional[float] = None) -> float:
    """min over s (optionally s ≤ s_max) of the weighted q-norm ‖v + s·1‖_q.

    The minimizer has closed form for q ∈ {1, 2, ∞}; other exponents fall
    back to golden-section search on the (convex) objective.
    """
    v = np.asarray(v, dtype=float)
    if q == 2.0:
        s = -expectation(space, v)
    elif q == _INF:
        s = -0.5 * (float(np.max(v)) + float(np.min(v)))
    elif q == 1.0:
        # weighted median of -v minimizes Σ wᵢ|vᵢ + s|
        order = np.argsort(v)
        cum = np.cumsum(space.weights[order])
        s = -float(v[order][int(np.argmax(cum >= 0.5))])
    else:
        lo = -float(np.max(v)) - 1.0
        hi = -float(np.min(v)) + 1.0
        prob = ScalarConvexProblem(
            objective=lambda s: norm_p(space, v + s, q), lo=lo, hi=hi)
        s = minimize_scalar_convex(prob, tol=1e-12).argmin
    if s_max is not None and s > s_max:
        s = s_max  # convex in s, so the constrained optimum sits at the cap
    return norm_p(space, v + s, q)


def dual_align(space: ProbSpace, d: np.ndarray, p: float) -> np.ndarray:
    """Point on the weighted q-ball boundary maximizing ⟨·, d⟩ (q dual to p)."""
    d = np.asarray(d, dtype=float)
    dn = norm_p(space, d, p)
    if dn <= 0.0:
        return np.zeros_like(d)
    if p == _INF:
        out = np.zeros_like(d)
        i = int(np.argmax(np.abs(d)))
        out[i] = math.copysign(1.0, d[i]) / space.weights[i]
        return out
    if p == 1.0:
        return np.sign(d)
    return np.sign(d) * np.abs(d / dn) ** (p - 1.0)


@dataclass(frozen=True)
class DualProblem:
    """One assembled instance of the hull dual for a fixed (X, mode, Π).

    ``feasible is None`` flags structural infeasibility (an affine row with
    zero normal and nonzero offset): the dual value is −∞ by convention
    sup ∅ = −∞.  ``decode`` maps the solver's decision vector to the dual
    variable X* of the representation theorem.
    """

    objective: Callable[[np.ndarray], float]
    supergradient: Callable[[np.ndarray], np.ndarray]
    feasible: Optional[FeasibleSet]
    decode: Callable[[np.ndarray], np.ndarray]
    starts: Tuple[np.ndarray, ...] = ()
    note: str = ""


def _invariant_row_or_none(space, a, b, parts):
    """Attach an affine row ⟨a, ·⟩ = b, collapsing degenerate normals.

    Returns False when the row is unsatisfiable (zero normal, b ≠ 0); the
    caller then reports a structurally infeasible dual.
    """
    if norm_p(space, a, 2.0) <= 1e-15:
        return abs(b) <= 1e-12  # 0 = b: row drops out or kills the set
    parts["affine"] = (np.asarray(a, dtype=float), float(b))
    return True


class RiskFunction:
    """Base descriptor; concrete subclasses are frozen dataclasses."""

    monotone = False
    cash_invariant = False

    def value(self, space: ProbSpace, x) -> float:
        raise NotImplementedError

    def conjugate(self, space: ProbSpace, xstar, *, tol: float = MEMBER_TOL) -> float:
        raise NotImplementedError

    def dual_problem(self, space: ProbSpace, x, mode: str, numeraire) -> DualProblem:
        raise NotImplementedError

    # dom f is the whole space for every descriptor except LogarithmicRisk
    def in_domain(self, x: np.ndarray) -> bool:
        return True


# ---------------------------------------------------------------------------
# deviation type: indicator conjugates decided through a shift witness
# ---------------------------------------------------------------------------


class _DeviationFamily(RiskFunction):
    """Shared machinery for c‖A(X)‖_p − E(X) with A(X) = X − E(X).

    The conjugate is the indicator of
        {X* : ∃ Y* (∈ −L^q_+ for the semi-variant), ‖Y*‖_q ≤ 1,
              c(Y* − E(Y*)) − 1 = X*}.
    The affine identity forces E(X*) = −1 and leaves Y* = (X*+1)/c + s·1.
    """

    p: float
    c: float
    negative_witness = False  # semi-deviation restricts Y* ≤ 0

    def _deviation(self, space, x):
        x = space.vector(x)
        return x - expectation(space, x)

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        xs = space.vector(xstar)
        if abs(expectation(space, xs) + 1.0) > tol:
            return _INF
        v = (xs + 1.0) / self.c
        cap = -float(np.max(v)) if self.negative_witness else None
        q = dual_exponent(self.p)
        return 0.0 if min_shift_norm(space, v, q, s_max=cap) <= 1.0 + tol else _INF

    def dual_problem(self, space, x, mode, numeraire):
        _check_mode(mode)
        x = space.vector(x)
        w = space.weights
        ex = expectation(space, x)
        c = self.c
        q = dual_exponent(self.p)

        def objective(u: np.ndarray) -> float:
            return c * (pairing(space, u, x) - expectation(space, u) * ex) - ex

        grad = c * (x - ex)  # constant: the objective is linear in Y*

        parts = {"qball": (q, 1.0)}
        if self.negative_witness:
            parts["sign"] = -np.ones_like(x)
        if mode in ("combined", "monotone"):
            # componentwise c(Y*ᵢ − E(Y*)) ≤ 1, one halfspace per atom
            rows = []
            for i in range(space.n):
                a = -np.ones_like(x)
                a[i] += 1.0 / w[i]
                rows.append((a, 1.0 / c))
            parts["halfspaces"] = tuple(rows)
        if mode in ("combined", "invariant"):
            pi = space.vector(numeraire)
            epi = expectation(space, pi)
            if not _invariant_row_or_none(space, c * (pi - epi), epi - 1.0, parts):
                return DualProblem(objective, lambda u: grad, None,
                                   self._decode_factory(space),
                                   note="invariant row unsatisfiable")

        d = self._deviation(space, x)
        if self.negative_witness:
            d = np.minimum(d, 0.0)
        starts = (np.zeros_like(x), dual_align(space, d, self.p))
        return DualProblem(objective, lambda u: grad,
                           FeasibleSet(weights=w, **parts),
                           self._decode_factory(space), starts)

    def _decode_factory(self, space):
        c = self.c

        def decode(u: np.ndarray) -> np.ndarray:
            return c * (u - expectation(space, u)) - 1.0

        return decode


@dataclass(frozen=True)
class LpDeviation(_DeviationFamily):
    p: float
    c: float
    cash_invariant = True

    def __post_init__(self):
        if not (1.0 <= self.p < _INF):
            raise InputError("LpDeviation needs p in [1, inf)")
        if not self.c > 0.0:
            raise InputError("LpDeviation needs c > 0")

    def value(self, space, x):
        x = space.vector(x)
        return self.c * norm_p(space, self._deviation(space, x), self.p) \
            - expectation(space, x)


@dataclass(frozen=True)
class LpSemiDeviation(_DeviationFamily):
    p: float
    c: float
    cash_invariant = True
    negative_witness = True

    def __post_init__(self):
        if not (1.0 <= self.p < _INF):
            raise InputError("LpSemiDeviation needs p in [1, inf)")
        if not self.c > 1.0:
            raise InputError("LpSemiDeviation needs c > 1")

    def value(self, space, x):
        x = space.vector(x)
        neg = np.maximum(-self._deviation(space, x), 0.0)
        return self.c * norm_p(space, neg, self.p) - expectation(space, x)


@dataclass(frozen=True)
class InfDeviation(_DeviationFamily):
    """Plain deviation ‖X − E(X)‖_p at unit scale, p ∈ [1, ∞].

    The interesting regime: its monotone hull collapses to 0 (lowering X by
    z = X − min(X) makes the argument constant), so every combined hull is
    −∞ and the dual feasible set of the representation theorem is empty.
    For p = ∞ the dual-ball norm is the weighted 1-norm.
    """

    p: float
    c: float = 1.0

    def __post_init__(self):
        if not (1.0 <= self.p or self.p == _INF):
            raise InputError("InfDeviation needs p in [1, inf]")
        if self.c != 1.0:
            raise InputError("InfDeviation is fixed at unit scale")

    def value(self, space, x):
        x = space.vector(x)
        return norm_p(space, self._deviation(space, x), self.p)

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        # witness identity X* = Y* − E(Y*) forces mean zero, no unit shift
        xs = space.vector(xstar)
        if abs(expectation(space, xs)) > tol:
            return _INF
        q = dual_exponent(self.p)
        return 0.0 if min_shift_norm(space, xs, q) <= 1.0 + tol else _INF

    def dual_problem(self, space, x, mode, numeraire):
        _check_mode(mode)
        x = space.vector(x)
        w = space.weights
        ex = expectation(space, x)
        q = dual_exponent(self.p)

        def objective(u: np.ndarray) -> float:
            return pairing(space, u, x) - expectation(space, u) * ex

        grad = x - ex

        parts = {"qball": (q, 1.0)}
        if mode in ("combined", "monotone"):
            rows = []
            for i in range(space.n):
                a = -np.ones_like(x)
                a[i] += 1.0 / w[i]
                rows.append((a, 0.0))
            parts["halfspaces"] = tuple(rows)
        if mode in ("combined", "invariant"):
            pi = space.vector(numeraire)
            epi = expectation(space, pi)
            if not _invariant_row_or_none(space, pi - epi, -1.0, parts):
                return DualProblem(objective, lambda u: grad, None,
                                   self._decode(space),
                                   note="invariant row unsatisfiable")
        starts = (np.zeros_like(x), dual_align(space, x - ex, self.p))
        return DualProblem(objective, lambda u: grad,
                           FeasibleSet(weights=w, **parts),
                           self._decode(space), starts)

    def _decode(self, space):
        def decode(u: np.ndarray) -> np.ndarray:
            return u - expectation(space, u)

        return decode


# ---------------------------------------------------------------------------
# moment type: finite closed-form conjugates
# ---------------------------------------------------------------------------


class _MomentFamily(RiskFunction):
    """Descriptors whose conjugate is a finite expectation on an explicit
    domain; the dual is solved directly in X*-space."""

    def _conj_smooth(self, space, u: np.ndarray) -> float:
        raise NotImplementedError

    def _conj_grad(self, space, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _domain_parts(self, space) -> dict:
        raise NotImplementedError

    def _informed_start(self, space, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual_problem(self, space, x, mode, numeraire):
        _check_mode(mode)
        x = space.vector(x)
        parts = self._domain_parts(space)
        if mode in ("combined", "monotone"):
            parts.setdefault("sign", -np.ones_like(x))
        if mode in ("combined", "invariant"):
            parts["affine"] = (space.vector(numeraire), -1.0)

        def objective(u: np.ndarray) -> float:
            return pairing(space, u, x) - self._conj_smooth(space, u)

        def supergradient(u: np.ndarray) -> np.ndarray:
            return x - self._conj_grad(space, u)

        starts = (self._informed_start(space, x), -np.ones_like(x))
        return DualProblem(objective, supergradient,
                           FeasibleSet(weights=space.weights, **parts),
                           lambda u: u, starts)


@dataclass(frozen=True)
class MeanLp(_MomentFamily):
    p: float
    c: float

    def __post_init__(self):
        if not (1.0 <= self.p < _INF):
            raise InputError("MeanLp needs p in [1, inf)")
        if not self.c > 0.0:
            raise InputError("MeanLp needs c > 0")

    def value(self, space, x):
        x = space.vector(x)
        return (self.c / self.p) * _mean(space, np.abs(x) ** self.p) \
            - expectation(space, x)

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        xs = space.vector(xstar)
        if self.p == 1.0:
            # conjugate of c|x| − x per atom: box constraint only
            return 0.0 if float(np.max(np.abs(xs + 1.0))) <= self.c + tol else _INF
        q = dual_exponent(self.p)
        beta = (self.p - 1.0) / (self.p * self.c ** (1.0 / (self.p - 1.0)))
        return beta * _mean(space, np.abs(xs + 1.0) ** q)

    def _conj_smooth(self, space, u):
        if self.p == 1.0:
            return 0.0
        q = dual_exponent(self.p)
        beta = (self.p - 1.0) / (self.p * self.c ** (1.0 / (self.p - 1.0)))
        return beta * _mean(space, np.abs(u + 1.0) ** q)

    def _conj_grad(self, space, u):
        if self.p == 1.0:
            return np.zeros_like(u)
        q = dual_exponent(self.p)
        s = u + 1.0
        return self.c ** (1.0 - q) * np.abs(s) ** (q - 1.0) * np.sign(s)

    def _domain_parts(self, space):
        if self.p == 1.0:
            n = space.n
            return {"box": (np.full(n, -1.0 - self.c), np.full(n, self.c - 1.0))}
        return {}

    def _informed_start(self, space, x):
        # gradient of f at X — the Fenchel-optimal point before hulling
        if self.p == 1.0:
            return self.c * np.sign(x) - 1.0
        return self.c * np.abs(x) ** (self.p - 1.0) * np.sign(x) - 1.0


@dataclass(frozen=True)
class LpSemiMoment(_MomentFamily):
    p: float
    c: float
    monotone = True

    def __post_init__(self):
        if not (1.0 <= self.p < _INF):
            raise InputError("LpSemiMoment needs p in [1, inf)")
        if not self.c > 0.0:
            raise InputError("LpSemiMoment needs c > 0")

    def value(self, space, x):
        x = space.vector(x)
        return _mean(space, np.maximum(-x, 0.0) ** self.p) / self.c

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        xs = space.vector(xstar)
        if float(np.max(xs)) > tol:
            return _INF
        xs = np.minimum(xs, 0.0)
        if self.p == 1.0:
            return 0.0 if float(np.min(xs)) >= -1.0 / self.c - tol else _INF
        q = dual_exponent(self.p)
        scale = (self.p - 1.0) / self.c
        return scale * _mean(space, np.abs(self.c / self.p * xs) ** q)

    def _conj_smooth(self, space, u):
        if self.p == 1.0:
            return 0.0
        q = dual_exponent(self.p)
        return (self.p - 1.0) / self.c \
            * _mean(space, np.abs(self.c / self.p * u) ** q)

    def _conj_grad(self, space, u):
        if self.p == 1.0:
            return np.zeros_like(u)
        q = dual_exponent(self.p)
        return (self.c / self.p) ** (q - 1.0) * np.abs(u) ** (q - 1.0) * np.sign(u)

    def _domain_parts(self, space):
        n = space.n
        if self.p == 1.0:
            return {"box": (np.full(n, -1.0 / self.c), np.zeros(n))}
        return {"sign": -np.ones(n)}

    def _informed_start(self, space, x):
        if self.p == 1.0:
            return np.where(x < 0.0, -1.0 / self.c, 0.0)
        return -(self.p / self.c) * np.maximum(-x, 0.0) ** (self.p - 1.0)


@dataclass(frozen=True)
class ExponentialRisk(_MomentFamily):
    monotone = True

    def value(self, space, x):
        x = space.vector(x)
        with np.errstate(over="ignore"):
            return _mean(space, np.exp(-x)) - 1.0

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        xs = space.vector(xstar)
        if float(np.max(xs)) > tol:
            return _INF
        xs = np.minimum(xs, 0.0)
        # E[−X* ln(−X*) + X*] + 1 with 0·ln 0 = 0
        return _mean(space, xlogy(-xs, -xs) + xs) + 1.0

    def _conj_smooth(self, space, u):
        # ascent iterates may sit a projection tolerance above the u <= 0
        # boundary; evaluate them at the boundary instead of poisoning the
        # run with log-of-negative nans
        u = np.minimum(u, 0.0)
        return _mean(space, xlogy(-u, -u) + u) + 1.0

    def _conj_grad(self, space, u):
        return -np.log(np.maximum(-u, 1e-300))

    def _domain_parts(self, space):
        return {"sign": -np.ones(space.n)}

    def _informed_start(self, space, x):
        # shape of the unconstrained Fenchel point, rescaled onto the
        # dual affine slice E(X*) = -1 where the hulled optimum lives
        with np.errstate(over="ignore"):
            u = -np.exp(-np.clip(x, -500.0, None))
        m = _mean(space, u)
        return u / abs(m) if m < 0.0 and np.isfinite(m) else u


@dataclass(frozen=True)
class LogarithmicRisk(_MomentFamily):
    monotone = True

    def value(self, space, x):
        x = space.vector(x)
        if float(np.min(x)) <= 0.0:
            return _INF
        return _mean(space, -np.log(x)) - 1.0

    def in_domain(self, x):
        return float(np.min(x)) > 0.0

    def conjugate(self, space, xstar, *, tol=MEMBER_TOL):
        xs = space.vector(xstar)
        if float(np.max(xs)) >= 0.0:  # the domain X* < 0 is open
            return _INF
        return -_mean(space, np.log(-xs))

    def _conj_smooth(self, space, u):
        return -_mean(space, np.log(np.maximum(-u, 1e-300)))

    def _conj_grad(self, space, u):
        return -1.0 / np.minimum(u, -LOG_CLAMP)

    def _domain_parts(self, space):
        n = space.n
        return {"box": (np.full(n, -_INF), np.full(n, -LOG_CLAMP))}

    def _informed_start(self, space, x):
        return -1.0 / np.maximum(x, LOG_CLAMP)


# ---------------------------------------------------------------------------


_FACTORY = {
    "lp_deviation": lambda p, c: LpDeviation(p=p, c=c),
    "lp_semi_deviation": lambda p, c: LpSemiDeviation(p=p, c=c),
    "mean_lp": lambda p, c: MeanLp(p=p, c=c),
    "lp_semi_moment": lambda p, c: LpSemiMoment(p=p, c=c),
    "exponential": lambda p, c: ExponentialRisk(),
    "logarithmic": lambda p, c: LogarithmicRisk(),
    "inf_deviation": lambda p, c: InfDeviation(p=p),
}

DESCRIPTOR_NAMES = tuple(sorted(_FACTORY))


def make_descriptor(name: str, p: float = 2.0, c: float = 1.0) -> RiskFunction:
    """Build a catalog descriptor by name, validating parameters."""
    try:
        factory = _FACTORY[name]
    except KeyError:
        raise InputError(
            f"unknown descriptor {name!r}; expected one of {DESCRIPTOR_NAMES}"
        ) from None
    return factory(p, c)
