"""Bob's vote-flip thresholds p_L < 1/2 < p_H.

A trading Bob who sees p_A in (1/2, 1) either colludes (moves the price
to 1 and votes 1, locking in v = 1) or corrects (moves the price to 1/2 and
votes 0, locking in v = 1/2). p_H is the price where the two are equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .errors import DomainError, SolverError
from .scoring import as_rule

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class Thresholds:
    p_L: float
    p_H: float

    def __post_init__(self):
        if not (0.0 < self.p_L < 0.5 < self.p_H < 1.0):
            raise DomainError(f"thresholds out of order: p_L={self.p_L!r}, p_H={self.p_H!r}")


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Bisection for a sign change of ``f`` on [lo, hi]; values may be +-inf.

    Returns the midpoint of the final bracket, whose width is <= ``tol``.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    f_lo, f_hi = f(lo), f(hi)
    if math.isnan(f_lo) or math.isnan(f_hi) or (f_lo > 0) == (f_hi > 0):
        raise SolverError(f"no sign change on [{lo!r}, {hi!r}] (f={f_lo!r}, {f_hi!r})")
    positive_low = f_lo > 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (f(mid) > 0) == positive_low:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _gap(rule, p: float) -> float:
    r = as_rule(rule)
    collude = r.raw(1.0, 1) - r.raw(p, 1)
    half = lambda x: 0.5 * r.raw(x, 1) + 0.5 * r.raw(x, 0)  # noqa: E731
    a, b = half(0.5), half(p)
    if math.isinf(b):
        # a is finite for every rule, so the correction payoff is +inf.
        return collude - math.inf
    return collude - (a - b)


def bob_indifference_gap(rule, p: float) -> float:
    """Bob's collude payoff minus his correct payoff at p_A = ``p`` in (1/2, 1).

    Positive means colluding (p_B = 1, v_B = 1) is strictly better.
    """
    if not (0.5 < p < 1.0):
        raise DomainError(f"p must lie in (1/2, 1), got {p!r}")
    return _gap(rule, p)


@lru_cache(maxsize=64)
def _solve_cached(rule, tolerance: float) -> Thresholds:
    p_h = bisect(lambda p: _gap(rule, p), 0.5, 1.0, tolerance)
    return Thresholds(p_L=1.0 - p_h, p_H=p_h)


def solve_thresholds(rule, tolerance: float = DEFAULT_TOL) -> Thresholds:
    """Root of the indifference gap on (1/2, 1); p_L follows by mirror symmetry."""
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    return _solve_cached(as_rule(rule), float(tolerance))
