"""Convex risk measures on finite weighted scenario spaces.

Certainty-equivalent risk measures built from normalized utilities, a
catalog of deviation/moment risk functions, their monotone and
numeraire-invariant convex hulls, and dual representations solved with
certified duality gaps.
"""

from .errors import ConvergenceError, InputError, RiskhullError
from .hulls import (
    DualSolution,
    HullSpec,
    conjugate_risk,
    duality_gap,
    eval_risk,
    hull_dual,
    hull_primal,
    slater_check,
)
from .intervals import Interval
from .oce import (
    OCEResult,
    SubdiffBox,
    cvar,
    cvar_subdiff,
    entropic,
    entropic_gradient,
    oce_conjugate,
    oce_subdiff,
    oce_value,
    subdiff_contains,
    subdiff_nonempty,
    worst_case,
    worst_case_subdiff,
)
from .riskfns import (
    DESCRIPTOR_NAMES,
    MODES,
    ExponentialRisk,
    InfDeviation,
    LogarithmicRisk,
    LpDeviation,
    LpSemiDeviation,
    LpSemiMoment,
    MeanLp,
    RiskFunction,
    make_descriptor,
)
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
from .verify import CheckResult, run_invariant_suite

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "ConvergenceError",
    "DESCRIPTOR_NAMES",
    "DualSolution",
    "Exponential",
    "ExponentialRisk",
    "HullSpec",
    "IndicatorNonneg",
    "InfDeviation",
    "InputError",
    "Interval",
    "LogarithmicRisk",
    "LpDeviation",
    "LpSemiDeviation",
    "LpSemiMoment",
    "MODES",
    "MeanLp",
    "OCEResult",
    "PiecewiseLinear",
    "ProbSpace",
    "RiskFunction",
    "RiskhullError",
    "SubdiffBox",
    "TwoSlope",
    "UtilityFunction",
    "check_attainment_condition",
    "check_normalization",
    "conjugate_risk",
    "cvar",
    "cvar_subdiff",
    "duality_gap",
    "entropic",
    "entropic_gradient",
    "ess_inf",
    "ess_sup",
    "eval_risk",
    "expectation",
    "hull_dual",
    "hull_primal",
    "make_descriptor",
    "oce_conjugate",
    "oce_subdiff",
    "norm_p",
    "oce_value",
    "pairing",
    "run_invariant_suite",
    "slater_check",
    "subdiff_contains",
    "subdiff_nonempty",
    "var_beta",
    "worst_case",
    "worst_case_subdiff",
]
