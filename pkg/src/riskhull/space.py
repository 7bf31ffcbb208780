"""Finite probability spaces and scenario vectors.

A scenario space is a finite set of atoms with strictly positive weights
summing to one.  Random variables are plain 1-D float arrays of matching
length; :meth:`ProbSpace.vector` is the validating constructor.  All
pairings and norms below are weighted by the atom probabilities, so that
``pairing(space, xstar, x)`` is the expectation ``E(X* X)`` and
``norm_p`` is the L^p(P) norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

# Weights may miss probability one by at most this much before the input
# is rejected rather than renormalized.
WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProbSpace:
    """Finite probability space given by strictly positive atom weights.

    Weights must sum to one within ``WEIGHT_SUM_TOL``; they are then
    renormalized exactly.  Anything further off is rejected.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InputError("weights must be a nonempty 1-D array")
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        if np.any(w <= 0):
            raise InputError("weights must be strictly positive")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InputError(
                f"weights sum to {total!r}, more than {WEIGHT_SUM_TOL} away from 1"
            )
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "ProbSpace":
        if n < 1:
            raise InputError("need at least one atom")
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def vector(self, values) -> np.ndarray:
        """Validate ``values`` as a random variable on this space."""
        x = np.asarray(values, dtype=float)
        if x.ndim == 0:
            x = np.full(self.n, float(x))
        if x.ndim != 1 or x.size != self.n:
            raise InputError(f"expected a vector of length {self.n}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("random variables must have finite entries")
        return x


def expectation(space: ProbSpace, x) -> float:
    x = space.vector(x)
    return float(space.weights @ x)


def pairing(space: ProbSpace, xstar, x) -> float:
    """Weighted bilinear pairing ``E(X* X)``."""
    xs, x = space.vector(xstar), space.vector(x)
    return float(space.weights @ (xs * x))


def norm_p(space: ProbSpace, x, p: float) -> float:
    """Weighted L^p norm; ``p = inf`` gives the (essential) sup norm."""
    x = space.vector(x)
    if math.isinf(p):
        if p < 0:
            raise InputError("norm exponent must be >= 1")
        return float(np.max(np.abs(x)))
    p = float(p)
    if p < 1:
        raise InputError("norm exponent must be >= 1")
    return float((space.weights @ np.abs(x) ** p) ** (1.0 / p))


def ess_inf(space: ProbSpace, x) -> float:
    """Essential infimum; on a finite space with positive weights, the min."""
    return float(np.min(space.vector(x)))


def ess_sup(space: ProbSpace, x) -> float:
    return float(np.max(space.vector(x)))


def var_beta(space: ProbSpace, x, beta: float) -> float:
    """Value at risk ``-inf{a : P(X <= a) > beta}`` at level ``beta``.

    Duplicate atom values are merged before the cumulative scan, and the
    comparison with ``beta`` is strict, so an atom whose cumulative
    probability exactly equals ``beta`` does not yet qualify.
    """
    x = space.vector(x)
    if not (0.0 < beta < 1.0):
        raise InputError("beta must lie strictly between 0 and 1")
    vals, inverse = np.unique(x, return_inverse=True)
    mass = np.zeros(vals.size)
    np.add.at(mass, inverse, space.weights)
    cum = np.cumsum(mass)
    cum[-1] = 1.0  # exact by construction; guards rounding in the scan
    idx = int(np.argmax(cum > beta))
    return -float(vals[idx])
