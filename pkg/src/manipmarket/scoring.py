"""Strictly proper scoring rules for a binary event.

Higher scores are better. Each rule is defined on a binary outcome and
extended linearly to the three-valued liquidation value v in {0, 1/2, 1}:

    s(p, v) = v * s(p, 1) + (1 - v) * s(p, 0)

The logarithmic rule returns ``-inf`` when a boundary report meets the
opposite outcome; no price clamping is done.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, IndeterminatePayoffError

NEG_INF = float("-inf")


class ScoringRule(str, enum.Enum):
    LOGARITHMIC = "logarithmic"
    QUADRATIC = "quadratic"
    SPHERICAL = "spherical"

    @classmethod
    def parse(cls, name: Union[str, "ScoringRule"]) -> "ScoringRule":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            known = ", ".join(r.value for r in cls)
            raise DomainError(f"unknown scoring rule {name!r} (expected one of {known})") from None

    def raw(self, p: float, outcome: int) -> float:
        if self is ScoringRule.LOGARITHMIC:
            x = p if outcome == 1 else 1.0 - p
            return math.log(x) if x > 0.0 else NEG_INF
        if self is ScoringRule.QUADRATIC:
            return 2.0 * p - p * p if outcome == 1 else 1.0 - p * p
        norm = math.sqrt(p * p + (1.0 - p) * (1.0 - p))
        return (p if outcome == 1 else 1.0 - p) / norm

    def __str__(self) -> str:
        return self.value


_ALIASES = {"lmsr": "logarithmic", "qmsr": "quadratic", "smsr": "spherical",
            "log": "logarithmic", "brier": "quadratic"}


@dataclass(frozen=True)
class AffineScoringRule:
    """``scale * base + shift`` with ``scale > 0``; strategically identical to ``base``."""

    base: ScoringRule
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("affine scale must be positive")

    def raw(self, p: float, outcome: int) -> float:
        return self.scale * self.base.raw(p, outcome) + self.shift

    def __str__(self) -> str:
        return f"{self.scale:g}*{self.base.value}{self.shift:+g}"


Rule = Union[ScoringRule, AffineScoringRule]


def as_rule(rule) -> Rule:
    """Accept a rule object or any accepted rule name."""
    if isinstance(rule, (ScoringRule, AffineScoringRule)):
        return rule
    return ScoringRule.parse(rule)


def _check_prob(name: str, x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0,1], got {x!r}")


def score(rule, p: float, outcome: int) -> float:
    """Score of report ``p`` when the binary event resolves to ``outcome``."""
    _check_prob("p", p)
    if outcome not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {outcome!r}")
    return as_rule(rule).raw(float(p), int(outcome))


def score_outcome(rule, p: float, v: float) -> float:
    """Score of ``p`` against a liquidation value ``v`` in [0, 1] (linear extension)."""
    _check_prob("v", v)
    if v == 1:
        return score(rule, p, 1)
    if v == 0:
        return score(rule, p, 0)
    return v * score(rule, p, 1) + (1.0 - v) * score(rule, p, 0)


def payoff(rule, p_new: float, p_old: float, v: float) -> float:
    """Market-scoring-rule payoff for moving the price from ``p_old`` to ``p_new``."""
    a = score_outcome(rule, p_new, v)
    b = score_outcome(rule, p_old, v)
    if math.isinf(a) and math.isinf(b):
        raise IndeterminatePayoffError(
            f"payoff for {p_old!r} -> {p_new!r} at v={v!r} is inf - inf")
    return a - b


def optimal_report(rule, expected_v: float) -> float:
    # Strict propriety plus linearity in v: the maximizer is the mean itself.
    as_rule(rule)
    _check_prob("expected_v", expected_v)
    return float(expected_v)
