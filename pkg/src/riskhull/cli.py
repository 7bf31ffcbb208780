"""Command-line surface: scenario ingestion, evaluation, verification.

Three subcommands over scenario CSV files::

    riskhull oce    --input FILE --utility {two-slope,cvar,exponential,worst-case,pwl} ...
    riskhull hull   --input FILE --desc NAME --mode {combined,monotone,invariant} ...
    riskhull verify [--input FILE | --n N --instances K] ...

Scenario files are comma-separated with a header whose first column is
``probability``; the remaining columns are named scenario vectors (the
canonical single-variable header is ``probability,value``, multi-variable
files use ``probability,value_1,...,value_k`` or any distinct names).
Rows are atoms; parse failures are reported with their line number.

Every command prints a human-readable report block.  With ``--out PATH``
the block is written to PATH and a machine-readable key-value file is
written next to it (same name, ``.kv`` extension) with one ``key=value``
pair per line: ``config.*`` echoes the run configuration, ``result.*``
carries full-precision numeric fields (``repr`` of the float), ``check.*``
the pass/fail verdicts, and ``verdict`` the overall outcome.  Timings
appear only in the human block, so re-running an echoed configuration
reproduces the ``.kv`` file bit for bit.

Exit codes: 0 success (all checks pass), 1 validation error (bad flags,
malformed input, parameters out of range), 2 numerical non-convergence
(a duality-gap or consistency check beyond tolerance).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, InputError
from .hulls import GAP_TOL, HullSpec, hull_dual, hull_primal, slater_check
from .intervals import Interval
from .oce import (
    cvar,
    cvar_subdiff,
    entropic,
    oce_conjugate,
    oce_subdiff,
    oce_value,
    subdiff_contains,
    subdiff_nonempty,
    worst_case,
)
from .riskfns import DESCRIPTOR_NAMES, MODES, make_descriptor
from .space import ProbSpace, expectation, pairing
from .utility import Exponential, IndicatorNonneg, PiecewiseLinear, TwoSlope
from .verify import run_invariant_suite

_INF = math.inf

UTILITY_CHOICES = ("two-slope", "cvar", "exponential", "worst-case", "pwl")


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


def read_scenarios(path: str) -> Tuple[ProbSpace, Dict[str, np.ndarray]]:
    """Parse a scenario CSV into a space and its named value columns.

    Raises :class:`~riskhull.errors.InputError` with the offending line
    number on any malformed content.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    rows = [(i + 1, line) for i, line in enumerate(lines) if line.strip()]
    if not rows:
        raise InputError(f"{path}: empty scenario file")
    header = [h.strip() for h in rows[0][1].split(",")]
    if not header or header[0] != "probability":
        raise InputError(
            f"{path}: line 1: header must start with 'probability', got {header!r}")
    names = header[1:]
    if not names:
        raise InputError(f"{path}: line 1: need at least one value column")
    if len(set(names)) != len(names) or any(not n for n in names):
        raise InputError(f"{path}: line 1: value column names must be unique and nonempty")
    probs: List[float] = []
    cols: List[List[float]] = [[] for _ in names]
    for lineno, line in rows[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise InputError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise InputError(f"{path}: line {lineno}: non-numeric field") from None
        probs.append(vals[0])
        for j, v in enumerate(vals[1:]):
            cols[j].append(v)
    try:
        space = ProbSpace(np.asarray(probs))
        columns = {n: space.vector(c) for n, c in zip(names, cols)}
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    return space, columns


def _pick_column(columns: Dict[str, np.ndarray], name: Optional[str]) -> Tuple[str, np.ndarray]:
    if name is not None:
        if name not in columns:
            raise InputError(
                f"no column named {name!r}; file has {sorted(columns)}")
        return name, columns[name]
    if "value" in columns:
        return "value", columns["value"]
    if len(columns) == 1:
        only = next(iter(columns))
        return only, columns[only]
    raise InputError(
        f"multiple value columns {sorted(columns)}; choose one with --column")


def _parse_numeraire(spec: str, columns: Dict[str, np.ndarray]) -> Tuple[str, HullSpec]:
    if spec == "const":
        return spec, HullSpec(1.0)
    if spec.startswith("column:"):
        name = spec[len("column:"):]
        if name not in columns:
            raise InputError(
                f"numeraire column {name!r} not in file; have {sorted(columns)}")
        return spec, HullSpec(columns[name])
    raise InputError(
        f"numeraire must be 'const' or 'column:<name>', got {spec!r}")


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


class Report:
    """Ordered human text block plus flat key-value pairs."""

    def __init__(self, command: str) -> None:
        self.lines: List[str] = [f"== riskhull {command} report =="]
        self.kv: List[Tuple[str, str]] = [("config.command", command)]

    def config(self, key: str, value) -> None:
        self.lines.append(f"{key:<18}: {value}")
        self.kv.append((f"config.{key.replace(' ', '_')}", str(value)))

    def result(self, key: str, value, note: str = "") -> None:
        if isinstance(value, float):
            value = float(value)  # numpy scalars repr as np.float64(...)
            shown = _fmt_value(value)
            raw = repr(value)
        else:
            shown, raw = str(value), str(value)
        suffix = f"  ({note})" if note else ""
        self.lines.append(f"{key:<18}: {shown}{suffix}")
        self.kv.append((f"result.{key.replace(' ', '_')}", raw))

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        tag = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        self.lines.append(f"check {name:<12}: {tag}{suffix}")
        self.kv.append((f"check.{name}", "pass" if passed else "fail"))

    def timing(self, seconds: float) -> None:
        # human block only: kept out of the .kv file so reruns are bit-identical
        self.lines.append(f"{'elapsed':<18}: {seconds:.2f} s")

    def verdict(self, passed: bool, label: Optional[str] = None) -> None:
        tag = label if label is not None else ("PASS" if passed else "FAIL")
        self.lines.append(f"{'verdict':<18}: {tag}")
        self.kv.append(("verdict", "pass" if passed else "fail"))

    def emit(self, out: Optional[str]) -> None:
        text = "\n".join(self.lines) + "\n"
        if out is None:
            sys.stdout.write(text)
            return
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        kv_path = out.rsplit(".", 1)[0] + ".kv" if "." in out.rsplit("/", 1)[-1] \
            else out + ".kv"
        with open(kv_path, "w", encoding="utf-8") as fh:
            for k, v in self.kv:
                fh.write(f"{k}={v}\n")
        sys.stdout.write(text)
        sys.stdout.write(f"report written to {out}; machine fields to {kv_path}\n")


def _fmt_interval(iv: Interval) -> str:
    if iv.is_empty:
        return "(empty)"
    lo = "-inf" if iv.lo == -_INF else f"{iv.lo:.6g}"
    hi = "+inf" if iv.hi == _INF else f"{iv.hi:.6g}"
    left = "(" if iv.lo == -_INF else "["
    right = ")" if iv.hi == _INF else "]"
    return f"{left}{lo}, {hi}{right}"


def _fmt_value(v: float) -> str:
    if v == _INF:
        return "+inf"
    if v == -_INF:
        return "-inf (divergent)"
    return f"{v:.12g}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _build_utility(args):
    if args.utility == "two-slope":
        if args.gamma1 is None or args.gamma2 is None:
            raise InputError("--utility two-slope needs --gamma1 and --gamma2")
        return TwoSlope(args.gamma1, args.gamma2)
    if args.utility == "cvar":
        if args.beta is None:
            raise InputError("--utility cvar needs --beta")
        if not (0.0 < args.beta < 1.0):
            raise InputError("--beta must lie strictly between 0 and 1")
        return TwoSlope(0.0, -1.0 / args.beta)
    if args.utility == "exponential":
        return Exponential()
    if args.utility == "worst-case":
        return IndicatorNonneg()
    if args.utility == "pwl":
        if args.slopes is None:
            raise InputError("--utility pwl needs --slopes (and --breaks)")
        return PiecewiseLinear(breaks=tuple(args.breaks or ()),
                               slopes=tuple(args.slopes))
    raise InputError(f"unknown utility {args.utility!r}")


def cmd_oce(args) -> int:
    t0 = time.perf_counter()
    space, columns = read_scenarios(args.input)
    colname, x = _pick_column(columns, args.column)
    v = _build_utility(args)

    rep = Report("oce")
    rep.config("input", args.input)
    rep.config("atoms", space.n)
    rep.config("column", colname)
    rep.config("utility", args.utility)
    if args.utility == "two-slope":
        rep.config("gamma1", args.gamma1)
        rep.config("gamma2", args.gamma2)
    if args.utility == "cvar":
        rep.config("beta", args.beta)
    if args.utility == "pwl":
        rep.config("breaks", list(args.breaks or ()))
        rep.config("slopes", list(args.slopes))
    rep.config("seed", args.seed)

    res = cvar(space, x, args.beta) if args.utility == "cvar" \
        else oce_value(space, v, x)
    rep.result("value", res.value, "shift solver tol 1e-10")
    rep.result("lambda_bar", res.lambda_bar)
    rep.result("attained", res.attained)
    rep.result("argmin interval", _fmt_interval(res.minimizer_interval))

    ok = True
    lower_slack = res.value + expectation(space, x)
    rep.check("lower_bound", lower_slack >= -1e-9,
              f"value + E(X) = {lower_slack:.3e} >= -1e-9")
    ok &= lower_slack >= -1e-9
    if args.utility == "cvar":
        box = cvar_subdiff(space, x, args.beta)
    else:
        box = oce_subdiff(space, v, x)
        if args.utility == "exponential":
            err = abs(res.value - entropic(space, x).value)
            rep.check("entropic_form", err <= 1e-9, f"|delta| = {err:.2e} <= 1e-9")
            ok &= err <= 1e-9
        if args.utility == "worst-case":
            err = abs(res.value - worst_case(space, x).value)
            rep.check("minimum_form", err <= 1e-9, f"|delta| = {err:.2e} <= 1e-9")
            ok &= err <= 1e-9
    for i, iv in enumerate(box.intervals):
        rep.result(f"subdiff[{i}]", _fmt_interval(iv))
    nonempty = subdiff_nonempty(space, box)
    rep.check("subdiff_nonempty", nonempty)
    ok &= nonempty

    if args.xstar_column is not None:
        _, xstar = _pick_column(columns, args.xstar_column)
        conj = oce_conjugate(space, v, xstar)
        rep.result("conjugate", conj, "mean tolerance 1e-9")
        if conj < _INF:
            fy = conj + res.value - pairing(space, xstar, x)
            member = subdiff_contains(space, box, xstar)
            rep.result("fenchel_slack", fy)
            rep.check("fenchel_young", fy >= -1e-9, f"slack {fy:.3e} >= -1e-9")
            rep.check("subgradient", member == (abs(fy) <= 1e-7),
                      "equality iff membership, tol 1e-7")
            ok &= fy >= -1e-9 and member == (abs(fy) <= 1e-7)

    rep.timing(time.perf_counter() - t0)
    rep.verdict(ok)
    rep.emit(args.out)
    return 0 if ok else 2


def cmd_hull(args) -> int:
    t0 = time.perf_counter()
    space, columns = read_scenarios(args.input)
    colname, x = _pick_column(columns, args.column)
    desc = make_descriptor(args.desc, p=args.p, c=args.c)
    pi_label, spec = _parse_numeraire(args.numeraire, columns)

    rep = Report("hull")
    rep.config("input", args.input)
    rep.config("atoms", space.n)
    rep.config("column", colname)
    rep.config("descriptor", args.desc)
    rep.config("p", args.p)
    rep.config("c", args.c)
    rep.config("mode", args.mode)
    rep.config("numeraire", pi_label)
    rep.config("tol-gap", args.tol_gap)
    rep.config("seed", args.seed)
    rep.config("restarts", args.restarts)
    rep.config("steps", args.steps)

    primal = hull_primal(space, desc, spec, x, args.mode)
    sol = hull_dual(space, desc, spec, x, args.mode, restarts=args.restarts,
                    steps=args.steps, seed=args.seed, primal=primal)
    scale = max(1.0, abs(primal)) if math.isfinite(primal) else 1.0

    rep.result("primal value", primal)
    rep.result("dual value", sol.dual_value)
    rep.result("risk value", desc.value(space, x))
    if math.isfinite(sol.dual_value):
        rep.result("dual vector", np.array2string(sol.xstar, precision=6))
    rep.result("iterations", sol.iterations)

    divergent = primal == -_INF and sol.dual_value == -_INF
    weak_ok = divergent or sol.dual_value <= primal + 1e-12 * scale
    rep.check("weak_duality", weak_ok, "dual <= primal + 1e-12*scale")
    rep.check("slater", sol.slater_ok)
    if divergent:
        rep.result("gap", 0.0, "extended-value agreement")
        gap_ok = True
        rep.check("gap", True, "primal and dual both -inf")
    elif math.isfinite(primal) and math.isfinite(sol.dual_value):
        gap_ok = sol.gap <= args.tol_gap * scale
        rep.result("gap", sol.gap, f"tolerance {args.tol_gap:g}*scale")
        rep.check("gap", gap_ok, f"{sol.gap:.3e} <= {args.tol_gap:g}*{scale:.3g}")
    else:
        gap_ok = False
        rep.result("gap", "undefined (one side infinite)")
        rep.check("gap", False, "primal/dual disagree on finiteness")

    ok = weak_ok and sol.slater_ok and gap_ok
    rep.timing(time.perf_counter() - t0)
    rep.verdict(ok, label=("DIVERGENT (certified -inf)" if divergent and ok else None))
    rep.emit(args.out)
    return 0 if ok else 2


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    rep = Report("verify")
    if args.input is not None:
        space, columns = read_scenarios(args.input)
        vectors = list(columns.values())
        rep.config("input", args.input)
    else:
        rng = np.random.default_rng(args.seed)
        w = rng.uniform(0.2, 1.0, size=args.n)
        space = ProbSpace(w / w.sum())
        vectors = []
        rep.config("input", f"<random n={args.n}>")
    rep.config("atoms", space.n)
    rep.config("instances", args.instances)
    rep.config("seed", args.seed)

    results = run_invariant_suite(space, vectors, seed=args.seed,
                                  instances=args.instances)
    for r in results:
        rep.check(r.name, r.passed, r.detail)
    ok = all(r.passed for r in results)
    rep.timing(time.perf_counter() - t0)
    rep.verdict(ok)
    rep.emit(args.out)
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract reserves 2
    # for numerical non-convergence, so remap to the validation code 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riskhull",
                     description="Scenario-based convex risk measures, "
                                 "their hulls, and duality certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    oce_p = sub.add_parser("oce", help="evaluate a certainty-equivalent risk measure")
    oce_p.add_argument("--input", required=True, help="scenario CSV file")
    oce_p.add_argument("--column", default=None, help="value column (default: 'value')")
    oce_p.add_argument("--utility", required=True, choices=UTILITY_CHOICES)
    oce_p.add_argument("--gamma1", type=float, default=None)
    oce_p.add_argument("--gamma2", type=float, default=None)
    oce_p.add_argument("--beta", type=float, default=None)
    oce_p.add_argument("--breaks", type=float, nargs="*", default=None)
    oce_p.add_argument("--slopes", type=float, nargs="+", default=None)
    oce_p.add_argument("--xstar-column", default=None,
                       help="column holding a dual vector for conjugate/membership checks")
    oce_p.add_argument("--seed", type=int, default=0)
    oce_p.add_argument("--out", default=None, help="write the report here (plus .kv)")
    oce_p.set_defaults(func=cmd_oce)

    hull_p = sub.add_parser("hull", help="primal/dual hull evaluation with certificates")
    hull_p.add_argument("--input", required=True)
    hull_p.add_argument("--column", default=None)
    hull_p.add_argument("--desc", required=True, choices=DESCRIPTOR_NAMES)
    hull_p.add_argument("--p", type=float, default=2.0)
    hull_p.add_argument("--c", type=float, default=1.0)
    hull_p.add_argument("--mode", required=True, choices=MODES)
    hull_p.add_argument("--numeraire", default="const",
                        help="'const' or 'column:<name>' (default: const)")
    hull_p.add_argument("--tol-gap", type=float, default=GAP_TOL)
    hull_p.add_argument("--seed", type=int, default=0)
    hull_p.add_argument("--restarts", type=int, default=16)
    hull_p.add_argument("--steps", type=int, default=300)
    hull_p.add_argument("--out", default=None)
    hull_p.set_defaults(func=cmd_hull)

    ver_p = sub.add_parser("verify", help="run the named invariant suite")
    ver_p.add_argument("--input", default=None,
                       help="scenario CSV (omit to verify on random instances)")
    ver_p.add_argument("--n", type=int, default=6,
                       help="atom count for generated instances")
    ver_p.add_argument("--instances", type=int, default=6,
                       help="random vectors added to the instance pool")
    ver_p.add_argument("--seed", type=int, default=0)
    ver_p.add_argument("--out", default=None)
    ver_p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ConvergenceError as exc:
        sys.stderr.write(f"non-convergence: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
