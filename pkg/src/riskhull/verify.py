"""Named invariant checks, runnable on scenario data or random instances.

Each check exercises one of the structural properties the package is built
around — risk-measure axioms, Fenchel–Young consistency, specialization
identities, hull fixed points, weak duality, projection geometry — at desk
scale, and reports a single pass/fail verdict with a short numeric detail.
The command-line ``verify`` subcommand is a thin wrapper over
:func:`run_invariant_suite`; the acceptance tests run the same properties
at their full pinned sample counts.

All randomness is drawn from one seeded generator, so a run is
reproducible from (space, scenario vectors, seed) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .hulls import (
    HullSpec,
    duality_gap,
    eval_risk,
    hull_dual,
    invariant_hull_primal,
    monotone_hull_primal,
    slater_check,
)
from .oce import (
    cvar,
    entropic,
    entropic_gradient,
    oce_conjugate,
    oce_subdiff,
    oce_value,
    subdiff_contains,
    worst_case,
)
from .riskfns import ExponentialRisk, LpDeviation, LpSemiMoment, MeanLp
from .solver import FeasibleSet, project_affine, project_qball
from .space import (
    ProbSpace,
    ess_inf,
    ess_sup,
    expectation,
    norm_p,
    pairing,
    var_beta,
)
from .utility import (
    Exponential,
    IndicatorNonneg,
    PiecewiseLinear,
    TwoSlope,
    UtilityFunction,
    check_attainment_condition,
    check_normalization,
)

_INF = math.inf

#: Utility variants exercised by the suite (one per closed-form family,
#: plus a second two-slope and a genuinely piecewise-linear instance).
UTILITY_CATALOG: Tuple[Tuple[str, UtilityFunction], ...] = (
    ("two_slope(0,-2)", TwoSlope(0.0, -2.0)),
    ("two_slope(-0.25,-4)", TwoSlope(-0.25, -4.0)),
    ("exponential", Exponential()),
    ("indicator_nonneg", IndicatorNonneg()),
    ("piecewise_linear", PiecewiseLinear(breaks=(-1.0, 1.0),
                                         slopes=(-3.0, -1.0, -0.2))),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _worst(vals: Sequence[float]) -> float:
    return max(vals) if vals else 0.0


# ---------------------------------------------------------------------------
# individual checks; each returns (passed, detail)
# ---------------------------------------------------------------------------


def _check_pairing_identity(space, xs, rng) -> Tuple[bool, str]:
    errs = [abs(pairing(space, np.ones(space.n), x) - expectation(space, x))
            for x in xs]
    return _worst(errs) <= 1e-12, f"max |<1,X> - E(X)| = {_worst(errs):.2e}"


def _check_norm_geometry(space, xs, rng) -> Tuple[bool, str]:
    errs = []
    for x in xs:
        y = rng.normal(size=space.n)
        c = float(rng.uniform(0.1, 5.0))
        for p in (1.0, 1.5, 2.0, 3.0, _INF):
            errs.append(abs(norm_p(space, c * x, p) - c * norm_p(space, x, p)))
            errs.append(max(0.0, norm_p(space, x + y, p)
                            - norm_p(space, x, p) - norm_p(space, y, p)))
        for lo_p, hi_p in ((1.0, 2.0), (2.0, 3.0), (3.0, _INF)):
            errs.append(max(0.0, norm_p(space, x, lo_p) - norm_p(space, x, hi_p)))
    return _worst(errs) <= 1e-10, f"max violation = {_worst(errs):.2e}"


def _check_expectation_bounds(space, xs, rng) -> Tuple[bool, str]:
    errs = []
    for x in xs:
        e = expectation(space, x)
        errs.append(max(0.0, ess_inf(space, x) - e))
        errs.append(max(0.0, e - ess_sup(space, x)))
        errs.append(abs(ess_inf(space, x) + ess_sup(space, -x)))
    return _worst(errs) <= 1e-12, f"max violation = {_worst(errs):.2e}"


def _check_quantile(space, xs, rng) -> Tuple[bool, str]:
    ok = True
    worst = 0.0
    for x in xs:
        beta = float(rng.uniform(0.05, 0.95))
        a = float(rng.normal())
        worst = max(worst, abs(var_beta(space, x + a, beta)
                               - (var_beta(space, x, beta) - a)))
        y = x - np.abs(rng.normal(size=space.n))   # y <= x pointwise
        ok = ok and var_beta(space, x, beta) <= var_beta(space, y, beta) + 1e-12
    return ok and worst <= 1e-12, f"cash-equivariance error = {worst:.2e}"


def _check_risk_axioms(space, xs, rng) -> Tuple[bool, str]:
    worst = 0.0
    for _, v in UTILITY_CATALOG:
        for x in xs:
            y = rng.normal(scale=1.0, size=space.n)
            t = float(rng.uniform(0.1, 0.9))
            a = float(rng.normal())
            rx = oce_value(space, v, x).value
            ry = oce_value(space, v, y).value
            rmix = oce_value(space, v, t * x + (1 - t) * y).value
            worst = max(worst, rmix - (t * rx + (1 - t) * ry))       # convexity
            rup = oce_value(space, v, x + np.abs(y)).value
            worst = max(worst, rup - rx)                             # monotone
            worst = max(worst, abs(oce_value(space, v, x + a).value - (rx - a)))
            worst = max(worst, -expectation(space, x) - rx)          # lower bound
    return worst <= 1e-7, f"max axiom violation = {worst:.2e}"


def _check_attainment(space, xs, rng) -> Tuple[bool, str]:
    for name, v in UTILITY_CATALOG:
        if not check_normalization(v):
            return False, f"{name} fails normalization"
        if not check_attainment_condition(v):
            return False, f"{name} fails the recession attainment condition"
        for x in xs:
            if not oce_value(space, v, x).attained:
                return False, f"{name} reported an unattained minimum"
    return True, "all variants normalized, attaining"


def _check_fenchel_young(space, xs, rng) -> Tuple[bool, str]:
    worst = 0.0
    mismatches = 0
    for _, v in UTILITY_CATALOG:
        dom = v.conjugate_domain()
        lo = dom.lo if math.isfinite(dom.lo) else -6.0
        hi = dom.hi if math.isfinite(dom.hi) else -1e-3
        for x in xs:
            box = oce_subdiff(space, v, x)
            # a guaranteed member: clamp a random selection into the box,
            # then repair the mean along a direction with interval slack
            xstar = _box_member(space, box, rng)
            if xstar is not None:
                gap = abs(oce_conjugate(space, v, xstar)
                          + oce_value(space, v, x).value
                          - pairing(space, xstar, x))
                worst = max(worst, gap)
            # a generic point: inequality always, equality iff membership
            u = rng.uniform(lo, hi, size=space.n)
            u = u - (expectation(space, u) + 1.0)   # mean -1, may leave dom
            conj = oce_conjugate(space, v, u)
            if conj == _INF:
                continue
            fy = conj + oce_value(space, v, x).value - pairing(space, u, x)
            if fy < -1e-9:
                return False, f"Fenchel-Young inequality violated by {-fy:.2e}"
            member = subdiff_contains(space, box, u, tol=1e-9)
            if member != (fy <= 1e-7):
                mismatches += 1
    ok = worst <= 1e-7 and mismatches == 0
    return ok, f"equality error at members = {worst:.2e}, mismatches = {mismatches}"


def _box_member(space, box, rng):
    """A point of the subdifferential box with mean exactly -1, or None."""
    lo = np.array([iv.lo for iv in box.intervals])
    hi = np.array([iv.hi for iv in box.intervals])
    if np.any(lo > hi):
        return None
    flo = np.where(np.isfinite(lo), lo, -20.0)
    fhi = np.where(np.isfinite(hi), hi, np.maximum(flo + 1.0, 0.0))
    x = flo + rng.uniform(0.0, 1.0, size=space.n) * (fhi - flo)
    w = space.weights
    for _ in range(60):
        d = -1.0 - float(w @ x)
        if abs(d) <= 1e-13:
            return x
        room = (fhi - x) if d > 0 else (x - flo)
        total = float(w @ room)
        if total <= 0.0:
            return None
        x = x + np.sign(d) * room * min(abs(d) / total, 1.0)
        x = np.clip(x, flo, fhi)
    return x if abs(float(w @ x) + 1.0) <= 1e-11 else None


def _check_specializations(space, xs, rng) -> Tuple[bool, str]:
    worst = 0.0
    for x in xs:
        beta = float(rng.uniform(0.1, 0.9))
        worst = max(worst, abs(cvar(space, x, beta).value
                               - oce_value(space, TwoSlope(0.0, -1.0 / beta), x).value))
        worst = max(worst, abs(entropic(space, x).value
                               - oce_value(space, Exponential(), x).value))
        worst = max(worst, abs(worst_case(space, x).value
                               - oce_value(space, IndicatorNonneg(), x).value))
        worst = max(worst, abs(worst_case(space, x).value + ess_inf(space, x)))
        g = entropic_gradient(space, x)
        worst = max(worst, abs(expectation(space, g) + 1.0))
    return worst <= 1e-9, f"max specialization error = {worst:.2e}"


def _check_projection_geometry(space, xs, rng) -> Tuple[bool, str]:
    w = space.weights
    worst = 0.0
    for _ in range(40):
        x = rng.normal(scale=2.0, size=space.n)
        y = rng.normal(scale=2.0, size=space.n)
        for proj in (
            lambda z: project_affine(z, w, np.ones(space.n), -1.0),
            lambda z: project_qball(z, w, 1.0, 1.0),
            lambda z: project_qball(z, w, 1.7, 1.0),
            lambda z: project_qball(z, w, 2.0, 1.0),
            lambda z: project_qball(z, w, 3.5, 1.0),
            lambda z: project_qball(z, w, _INF, 1.0),
        ):
            px, py = proj(x), proj(y)
            worst = max(worst, float(np.max(np.abs(proj(px) - px))))
            d0 = math.sqrt(float(w @ (x - y) ** 2))
            d1 = math.sqrt(float(w @ (px - py) ** 2))
            worst = max(worst, d1 - d0)
    return worst <= 1e-10, f"max projection defect = {worst:.2e}"


def _check_hull_fixed_points(space, xs, rng) -> Tuple[bool, str]:
    worst = 0.0
    mono = LpSemiMoment(p=2.0, c=1.0)
    inv = LpDeviation(p=2.0, c=1.0)
    for x in xs[:3]:
        worst = max(worst, abs(monotone_hull_primal(space, mono, x)
                               - eval_risk(space, mono, x)))
        worst = max(worst, abs(invariant_hull_primal(space, inv, None, x)
                               - eval_risk(space, inv, x)))
        worst = max(worst, abs(invariant_hull_primal(space, ExponentialRisk(), None, x)
                               - entropic(space, x).value))
    return worst <= 1e-8, f"max fixed-point error = {worst:.2e}"


def _check_hull_duality(space, xs, rng) -> Tuple[bool, str]:
    desc = MeanLp(p=2.0, c=1.0)
    spec = HullSpec(1.0)
    worst_gap = 0.0
    for x in xs[:2]:
        if not slater_check(space, desc, spec, x):
            return False, "Slater qualification unexpectedly fails"
        for mode in ("combined", "monotone", "invariant"):
            sol = hull_dual(space, desc, spec, x, mode, restarts=8, steps=200)
            scale = max(1.0, abs(sol.primal_value))
            if sol.dual_value > sol.primal_value + 1e-12 * scale:
                return False, f"weak duality violated in mode {mode}"
            worst_gap = max(worst_gap, sol.gap / scale)
    return worst_gap <= 1e-4, f"max relative gap = {worst_gap:.2e}"


_CHECKS: Tuple[Tuple[str, Callable], ...] = (
    ("pairing_identity", _check_pairing_identity),
    ("norm_geometry", _check_norm_geometry),
    ("expectation_bounds", _check_expectation_bounds),
    ("quantile_equivariance", _check_quantile),
    ("risk_axioms", _check_risk_axioms),
    ("attainment", _check_attainment),
    ("fenchel_young", _check_fenchel_young),
    ("specializations", _check_specializations),
    ("projection_geometry", _check_projection_geometry),
    ("hull_fixed_points", _check_hull_fixed_points),
    ("hull_duality", _check_hull_duality),
)

CHECK_NAMES = tuple(name for name, _ in _CHECKS)


def run_invariant_suite(
    space: ProbSpace,
    scenario_vectors: Sequence[np.ndarray] = (),
    *,
    seed: int = 0,
    instances: int = 6,
) -> List[CheckResult]:
    """Run every named check; returns one :class:`CheckResult` per check.

    ``scenario_vectors`` (e.g. the value columns of an input file) are
    always included in the instance pool; ``instances`` random vectors
    drawn from ``seed`` are appended so the suite is meaningful even for
    a single-column file.
    """
    rng = np.random.default_rng(seed)
    xs = [space.vector(x) for x in scenario_vectors]
    xs += [rng.normal(scale=1.5, size=space.n) for _ in range(max(instances, 1))]
    results = []
    for name, fn in _CHECKS:
        try:
            passed, detail = fn(space, xs, rng)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name=name, passed=passed, detail=detail))
    return results
