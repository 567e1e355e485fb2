"""What prices reveal: informativeness labels and recovery of Alice's signal."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional

from .beliefs import RELEVANCE_TOL, SignalModel, posterior_q0, stochastically_relevant
from .equilibrium import (
    Direction,
    EquilibriumProfile,
    Regime,
    outcome_distribution,
    solve_equilibrium,
)
from .errors import DomainError
from .thresholds import solve_thresholds

PRICE_MATCH_TOL = 1e-6


class Stage(str, enum.Enum):
    AFTER_ALICE = "after_alice"
    FINAL = "final"


class Label(str, enum.Enum):
    BAYESIAN_ESTIMATE = "bayesian_estimate"
    PREDETERMINED = "predetermined"
    ACTUAL_OUTCOME = "actual_outcome"


@dataclass(frozen=True)
class InformativenessLabel:
    stage: Stage
    label: Label

    def to_dict(self) -> dict:
        return {"stage": self.stage.value, "label": self.label.value}


def classify_informativeness(profile: EquilibriumProfile, bob_traded: bool) -> List[InformativenessLabel]:
    first = Label.BAYESIAN_ESTIMATE if profile.regime is Regime.LPP else Label.PREDETERMINED
    final = Label.ACTUAL_OUTCOME if bob_traded else first
    return [InformativenessLabel(Stage.AFTER_ALICE, first), InformativenessLabel(Stage.FINAL, final)]


class RecoveryKind(str, enum.Enum):
    EXACT_SIGNAL = "exact_signal"
    HALFSPACE_ONLY = "halfspace_only"
    INDETERMINATE = "indeterminate"


class Halfspace(str, enum.Enum):
    Q0_BELOW_HALF = "q0_below_half"
    Q0_ABOVE_HALF = "q0_above_half"


@dataclass(frozen=True)
class RecoveryResult:
    kind: RecoveryKind
    signal: Optional[int] = None
    halfspace: Optional[Halfspace] = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.signal is not None:
            d["signal"] = self.signal
        if self.halfspace is not None:
            d["halfspace"] = self.halfspace.value
        return d


def recover_signal(model: SignalModel, rule, pi: float, observed_p_a: float,
                   tolerance: float = PRICE_MATCH_TOL) -> RecoveryResult:
    """Invert Alice's equilibrium price back to her signal where possible.

    An LPP price determines q0 and, under stochastic relevance, the signal.
    An HPP price only tells which side of 1/2 q0 is on.
    """
    if not (0.0 < observed_p_a < 1.0):
        raise DomainError(f"observed price must lie in (0,1), got {observed_p_a!r}")
    profiles = {s: solve_equilibrium(rule, pi, posterior_q0(model, s)) for s in (0, 1)}
    matches = [s for s, prof in profiles.items()
               if abs(prof.alice_price - observed_p_a) <= tolerance]

    if len(matches) == 1:
        prof = profiles[matches[0]]
        if prof.regime is Regime.LPP and stochastically_relevant(model, RELEVANCE_TOL):
            return RecoveryResult(RecoveryKind.EXACT_SIGNAL, signal=matches[0])

    hpp = [profiles[s] for s in matches if profiles[s].regime is Regime.HPP]
    if hpp:
        up = hpp[0].direction is not Direction.DOWN
        return RecoveryResult(RecoveryKind.HALFSPACE_ONLY,
                              halfspace=Halfspace.Q0_BELOW_HALF if up else Halfspace.Q0_ABOVE_HALF)
    th = solve_thresholds(rule)
    if abs(observed_p_a - th.p_H) <= tolerance:
        return RecoveryResult(RecoveryKind.HALFSPACE_ONLY, halfspace=Halfspace.Q0_BELOW_HALF)
    if abs(observed_p_a - th.p_L) <= tolerance:
        return RecoveryResult(RecoveryKind.HALFSPACE_ONLY, halfspace=Halfspace.Q0_ABOVE_HALF)
    return RecoveryResult(RecoveryKind.INDETERMINATE)


def expected_liquidation(rule, pi: float, q0: float, p_a: float) -> float:
    dist = outcome_distribution(rule, solve_thresholds(rule), pi, q0, p_a)
    return sum(v * w for v, w in dist.items())


def fixed_point_residual(rule, pi: float, q0: float, p_a: float) -> float:
    """|p_A - E[v]| under the play that p_A itself induces; zero at LPP prices."""
    if p_a == 0.5:
        raise DomainError("p_A = 1/2 is excluded")
    return abs(p_a - expected_liquidation(rule, pi, q0, p_a))
