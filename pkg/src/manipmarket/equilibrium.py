"""Best responses, the two equilibrium candidates and the crossover probability.

The market opens at p0 = 1/2. Alice moves the price to p_A, Bob trades with
probability 1 - pi and otherwise votes his signal. All closed forms below
are written for the "up" direction (q0 < 1/2, Alice pushes the price above
1/2); the other direction is obtained by reflecting p -> 1 - p.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .errors import DomainError
from .scoring import as_rule, score_outcome
from .thresholds import DEFAULT_TOL, Thresholds, bisect, solve_thresholds

P0 = 0.5
# Prices within this distance of a threshold count as on it (thresholds are solved to 1e-10).
BOUNDARY_TOL = 1e-9


class Regime(str, enum.Enum):
    LPP = "LPP"
    HPP = "HPP"


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class BobStrategy:
    trade_target: float
    vote: int

    def reflected(self) -> "BobStrategy":
        return BobStrategy(1.0 - self.trade_target, 1 - self.vote)


class Candidate(NamedTuple):
    price: float
    payoff: float
    valid: bool = True


@dataclass(frozen=True)
class EquilibriumProfile:
    rule: str
    regime: Regime
    direction: Direction
    alice_price: float
    alice_vote: int
    bob_if_trading: BobStrategy
    alice_expected_payoff: float
    pi: float
    q0: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        d["direction"] = self.direction.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EquilibriumProfile":
        return cls(
            rule=d["rule"],
            regime=Regime(d["regime"]),
            direction=Direction(d["direction"]),
            alice_price=d["alice_price"],
            alice_vote=d["alice_vote"],
            bob_if_trading=BobStrategy(**d["bob_if_trading"]),
            alice_expected_payoff=d["alice_expected_payoff"],
            pi=d["pi"],
            q0=d["q0"],
        )


class Crossover(NamedTuple):
    pi_c: float
    note: str


def _check_prob(name, x):
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0,1], got {x!r}")


def _thresholds(rule, thresholds: Optional[Thresholds]) -> Thresholds:
    return thresholds if thresholds is not None else solve_thresholds(rule)


def _expected_gain(rule, price: float, dist: Dict[float, float]) -> float:
    """Alice's expected market payoff s(price, v) - s(p0, v) over a distribution of v."""
    total = 0.0
    for v, w in dist.items():
        if w > 0.0:
            total += w * (score_outcome(rule, price, v) - score_outcome(rule, P0, v))
    return total


def alice_rational_vote(p_a: float, s_a: int) -> int:
    """Alice votes with the side she pushed the price toward; truthfully at p_A = 1/2."""
    _check_prob("p_A", p_a)
    if p_a > P0:
        return 1
    if p_a < P0:
        return 0
    return int(s_a)


def bob_best_response(rule, thresholds: Optional[Thresholds], p_a: float) -> BobStrategy:
    """Trading Bob's price move and vote given Alice's price.

    Near 1/2 he colludes, pushing the price all the way to Alice's side and
    voting with her; far from 1/2 he corrects to p = 1/2 by voting against
    her. The boundary prices themselves count as collusive.
    """
    th = _thresholds(as_rule(rule), thresholds)
    _check_prob("p_A", p_a)
    if p_a == P0:
        raise DomainError("p_A = 1/2 leaves Alice's vote indeterminate; Bob's response is undefined")
    if p_a > P0:
        return BobStrategy(1.0, 1) if p_a <= th.p_H + BOUNDARY_TOL else BobStrategy(0.5, 0)
    return BobStrategy(0.0, 0) if p_a >= th.p_L - BOUNDARY_TOL else BobStrategy(0.5, 1)


def outcome_distribution(rule, thresholds: Optional[Thresholds], pi: float, q0: float,
                         p_a: float) -> Dict[float, float]:
    """Distribution of the liquidation value v induced by Alice's price ``p_a`` (!= 1/2)."""
    _check_prob("pi", pi)
    _check_prob("q0", q0)
    v_a = alice_rational_vote(p_a, 0)
    bob = bob_best_response(rule, thresholds, p_a)
    dist: Dict[float, float] = {}
    for v, w in (((v_a + bob.vote) / 2, 1.0 - pi),
                 (v_a / 2, pi * q0),
                 ((v_a + 1) / 2, pi * (1.0 - q0))):
        dist[v] = dist.get(v, 0.0) + w
    return dist


def alice_expected_payoff(rule, thresholds: Optional[Thresholds], pi: float, q0: float,
                          p_a: float) -> float:
    """Exact expected payoff of Alice's price ``p_a``; abstaining (p_A = 1/2) pays 0."""
    if p_a == P0:
        return 0.0
    rule = as_rule(rule)
    return _expected_gain(rule, p_a, outcome_distribution(rule, thresholds, pi, q0, p_a))


def _require_up(pi, q0):
    _check_prob("pi", pi)
    _check_prob("q0", q0)
    if q0 > 0.5:
        raise DomainError("candidate formulas take q0 <= 1/2; use solve_equilibrium for q0 > 1/2")


def lpp_candidate(rule, thresholds: Optional[Thresholds], pi: float, q0: float) -> Candidate:
    """Alice prices at her posterior mean of v, expecting a trading Bob to correct."""
    _require_up(pi, q0)
    rule = as_rule(rule)
    th = _thresholds(rule, thresholds)
    a = pi * (1.0 - q0)
    price = (1.0 + a) / 2.0
    gain = _expected_gain(rule, price, {1.0: a, 0.5: 1.0 - a})
    return Candidate(price, gain, price > th.p_H + BOUNDARY_TOL)


def hpp_candidate(rule, thresholds: Optional[Thresholds], pi: float, q0: float) -> Candidate:
    """Alice prices at p_H so that a trading Bob colludes.

    The collusive mean 1 - pi*q0/2 is the best price inside the collusion
    band; when it falls below p_H (only possible for the logarithmic rule)
    Alice stops there instead of at p_H.
    """
    _require_up(pi, q0)
    rule = as_rule(rule)
    th = _thresholds(rule, thresholds)
    b = pi * q0
    price = min(th.p_H, 1.0 - b / 2.0)
    return Candidate(price, _expected_gain(rule, price, {1.0: 1.0 - b, 0.5: b}))


def _solve_up(rule, th: Thresholds, pi: float, q0: float, direction: Direction,
              pi_out: float, q0_out: float) -> EquilibriumProfile:
    lpp = lpp_candidate(rule, th, pi, q0)
    hpp = hpp_candidate(rule, th, pi, q0)
    if lpp.valid and lpp.payoff > hpp.payoff:
        regime, best = Regime.LPP, lpp
    else:
        regime, best = Regime.HPP, hpp
    return EquilibriumProfile(
        rule=str(rule),
        regime=regime,
        direction=direction,
        alice_price=best.price,
        alice_vote=1,
        bob_if_trading=bob_best_response(rule, th, best.price),
        alice_expected_payoff=best.payoff,
        pi=pi_out,
        q0=q0_out,
    )


def solve_equilibrium(rule, pi: float, q0: float,
                      thresholds: Optional[Thresholds] = None) -> EquilibriumProfile:
    """Pick the better of the LPP and HPP candidates (ties go to HPP)."""
    _check_prob("pi", pi)
    _check_prob("q0", q0)
    rule = as_rule(rule)
    th = _thresholds(rule, thresholds)
    if q0 < 0.5:
        return _solve_up(rule, th, pi, q0, Direction.UP, pi, q0)
    if q0 == 0.5:
        return _solve_up(rule, th, pi, q0, Direction.DEGENERATE, pi, q0)
    up = _solve_up(rule, th, pi, 1.0 - q0, Direction.DOWN, pi, q0)
    return EquilibriumProfile(
        rule=up.rule,
        regime=up.regime,
        direction=Direction.DOWN,
        alice_price=1.0 - up.alice_price,
        alice_vote=0,
        bob_if_trading=up.bob_if_trading.reflected(),
        alice_expected_payoff=up.alice_expected_payoff,
        pi=pi,
        q0=q0,
    )


def crossover_probability(rule, q0: float, tolerance: float = DEFAULT_TOL) -> Crossover:
    """Non-participation probability where the LPP candidate overtakes the HPP one."""
    _check_prob("q0", q0)
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    rule = as_rule(rule)
    th = solve_thresholds(rule)
    q = min(q0, 1.0 - q0)

    def lpp_advantage(pi):
        lpp = lpp_candidate(rule, th, pi, q)
        if not lpp.valid:
            return -math.inf
        return lpp.payoff - hpp_candidate(rule, th, pi, q).payoff

    lo, hi = lpp_advantage(0.0), lpp_advantage(1.0)
    if lo > 0:
        return Crossover(0.0, "LPP for every pi in [0,1]")
    if not hi > 0:
        return Crossover(1.0, "HPP for every pi in [0,1]")
    return Crossover(bisect(lpp_advantage, 0.0, 1.0, tolerance), "HPP below pi_c, LPP above")


def default_q0_grid(n: int = 99) -> List[float]:
    """``k / (n + 1)`` for k = 1..n, with 1/2 dropped."""
    if n < 1:
        raise DomainError("grid size must be positive")
    return [k / (n + 1) for k in range(1, n + 1) if 2 * k != n + 1]


def crossover_curve(rule, q0_grid: Iterable[float], tolerance: float = DEFAULT_TOL,
                    max_workers: Optional[int] = None) -> List[Tuple[float, float]]:
    rule = as_rule(rule)
    grid = [float(q) for q in q0_grid]
    for q in grid:
        if not (0.0 < q < 1.0) or q == 0.5:
            raise DomainError(f"grid values must lie in (0,1) without 1/2, got {q!r}")
    solve = lambda q: (q, crossover_probability(rule, q, tolerance).pi_c)  # noqa: E731
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(solve, grid))
    return [solve(q) for q in grid]
