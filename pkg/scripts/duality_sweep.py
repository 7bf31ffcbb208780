#!/usr/bin/env python3
"""Duality-gap sweep over the descriptor catalog.

Draws random scenario spaces and positions, solves primal and dual for
every descriptor/mode pair, and tabulates relative gaps, weak-duality
slack, and timing.  This is the reproducibility harness behind the
hull-duality acceptance bound: every row must certify a relative gap
below ``--tol-gap``.

Usage::

    python scripts/duality_sweep.py [--instances 5] [--max-n 6] [--seed 2026]
"""

from __future__ import annotations

import argparse
import math
import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from riskhull import HullSpec, ProbSpace, hull_dual, hull_primal, make_descriptor
from riskhull.riskfns import MODES


@dataclass(frozen=True)
class SweepConfig:
    instances: int = 5
    max_n: int = 6
    seed: int = 2026
    restarts: int = 8
    steps: int = 200
    tol_gap: float = 1e-4
    descriptors: Tuple[Tuple[str, float, float], ...] = (
        ("lp_deviation", 1.0, 1.0),
        ("lp_deviation", 2.0, 1.0),
        ("lp_deviation", 3.0, 1.2),
        ("lp_semi_deviation", 2.0, 2.0),
        ("lp_semi_deviation", 1.5, 1.5),
        ("mean_lp", 1.0, 0.5),
        ("mean_lp", 2.0, 1.0),
        ("lp_semi_moment", 2.0, 1.0),
        ("lp_semi_moment", 3.0, 0.8),
        ("exponential", 2.0, 1.0),
        ("logarithmic", 2.0, 1.0),
        ("inf_deviation", math.inf, 1.0),
    )


@dataclass
class Row:
    desc: str
    mode: str
    n: int
    primal: float
    dual: float
    relgap: float
    seconds: float
    certified: bool
    note: str = field(default="")


def run(cfg: SweepConfig) -> List[Row]:
    rng = np.random.default_rng(cfg.seed)
    rows: List[Row] = []
    for name, p, c in cfg.descriptors:
        desc = make_descriptor(name, p=p, c=c)
        label = f"{name}({p:g},{c:g})"
        for mode in MODES:
            for k in range(cfg.instances):
                n = int(rng.integers(2, cfg.max_n + 1))
                w = rng.uniform(0.2, 1.0, n)
                space = ProbSpace(w / w.sum())
                x = rng.normal(0.0, 1.5, n)
                if name == "logarithmic":
                    x = np.abs(x) + 0.2
                spec = None if mode == "monotone" else HullSpec(rng.uniform(0.5, 1.5, n))
                t0 = time.perf_counter()
                primal = hull_primal(space, desc, spec, x, mode)
                sol = hull_dual(space, desc, spec, x, mode, restarts=cfg.restarts,
                                steps=cfg.steps, seed=cfg.seed + k, primal=primal)
                dt = time.perf_counter() - t0
                if primal == -math.inf and sol.dual_value == -math.inf:
                    relgap, ok, note = 0.0, True, "divergent (agreed)"
                elif math.isfinite(primal) and math.isfinite(sol.dual_value):
                    scale = max(1.0, abs(primal))
                    relgap = (primal - sol.dual_value) / scale
                    ok = -1e-12 <= relgap <= cfg.tol_gap
                    note = ""
                else:
                    relgap, ok, note = math.inf, False, "finiteness mismatch"
                rows.append(Row(label, mode, n, primal, sol.dual_value,
                                relgap, dt, ok, note))
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--tol-gap", type=float, default=1e-4)
    a = ap.parse_args()
    cfg = SweepConfig(instances=a.instances, max_n=a.max_n, seed=a.seed,
                      restarts=a.restarts, steps=a.steps, tol_gap=a.tol_gap)

    t0 = time.perf_counter()
    rows = run(cfg)
    total = time.perf_counter() - t0

    bad = [r for r in rows if not r.certified]
    finite = [r for r in rows if math.isfinite(r.relgap)]
    finite.sort(key=lambda r: r.relgap, reverse=True)
    print(f"{len(rows)} instances in {total:.1f} s; "
          f"{len(rows) - len(bad)} certified, {len(bad)} failed")
    print("\nworst relative gaps")
    for r in finite[:8]:
        print(f"  {r.desc:<24} {r.mode:<10} n={r.n}  relgap={r.relgap:.3e}  "
              f"{r.seconds:.2f} s")
    slow = sorted(rows, key=lambda r: r.seconds, reverse=True)[:5]
    print("\nslowest instances")
    for r in slow:
        print(f"  {r.desc:<24} {r.mode:<10} n={r.n}  {r.seconds:.2f} s")
    if bad:
        print("\nFAILED rows")
        for r in bad:
            print(f"  {r.desc} {r.mode} n={r.n} primal={r.primal} "
                  f"dual={r.dual} {r.note}")
        raise SystemExit(2)


if __name__ == "__main__":
    main()
