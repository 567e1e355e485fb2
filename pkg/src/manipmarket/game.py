"""Playing the two-stage game: single plays, Monte Carlo runs, equilibrium checks.

``brute_force_equilibrium`` is an oracle for ``solve_equilibrium``. It does not
use the candidate formulas or the threshold map: Bob's reply is found by
comparing his two options directly, and Alice's price by exhaustive search.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .beliefs import SignalModel, posterior_q0
from .equilibrium import (
    P0,
    EquilibriumProfile,
    Regime,
    alice_expected_payoff,
    alice_rational_vote,
    bob_best_response,
    outcome_distribution,
    solve_equilibrium,
)
from .errors import ConfigurationError, DomainError
from .scoring import Rule, as_rule, payoff, score_outcome
from .thresholds import solve_thresholds

BLOCK_SIZE = 4096
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GameConfig:
    """``belief`` is a SignalModel or a direct pair (q0 given s_A=0, q0 given s_A=1)."""

    rule: Rule
    pi: float
    belief: Union[SignalModel, Tuple[float, float]]
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rule", as_rule(self.rule))
        if not (0.0 <= self.pi <= 1.0):
            raise DomainError(f"pi must lie in [0,1], got {self.pi!r}")
        if not isinstance(self.belief, SignalModel):
            pair = tuple(float(q) for q in self.belief)
            if len(pair) != 2 or not all(0.0 <= q <= 1.0 for q in pair):
                raise DomainError(f"direct q0 values must be two numbers in [0,1], got {self.belief!r}")
            object.__setattr__(self, "belief", pair)
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.replications) < 1:
            raise DomainError("replications must be >= 1")

    @property
    def direct(self) -> bool:
        return not isinstance(self.belief, SignalModel)

    def q0(self, s_a: int) -> float:
        if self.direct:
            return self.belief[s_a]
        return posterior_q0(self.belief, s_a)


@dataclass(frozen=True)
class GameOutcome:
    s_A: int
    s_B: int
    bob_traded: bool
    p_A: float
    p_B: float
    v_A: int
    v_B: int
    v: float
    r_A: float
    r_B: float
    regime: Regime


def play(config: GameConfig, s_a: int, s_b: int, bob_participates: bool,
         profile: Optional[EquilibriumProfile] = None) -> GameOutcome:
    """One play with Alice on her equilibrium price for ``s_a``.

    ``profile`` may be passed to skip re-solving; it must belong to q0(s_a).
    """
    rule = config.rule
    if profile is None:
        profile = solve_equilibrium(rule, config.pi, config.q0(s_a))
    p_a = profile.alice_price
    v_a = alice_rational_vote(p_a, s_a)
    if bob_participates:
        bob = bob_best_response(rule, solve_thresholds(rule), p_a)
        p_b, v_b = bob.trade_target, bob.vote
    else:
        p_b, v_b = p_a, int(s_b)
    v = (v_a + v_b) / 2
    r_a = payoff(rule, p_a, P0, v)
    r_b = payoff(rule, p_b, p_a, v) if bob_participates else 0.0
    return GameOutcome(int(s_a), int(s_b), bool(bob_participates), p_a, p_b, v_a, v_b, v,
                       r_a, r_b, profile.regime)


@dataclass
class SimulationReport:
    replications: int
    mean_r_A: float
    se_r_A: float
    mean_r_B: float
    se_r_B: float
    mean_v: float
    se_v: float
    bob_trade_frequency: float
    regime_counts: Dict[str, int]
    all_finite: bool
    max_telescoping_error: float
    type_counts: Optional[Dict[str, int]] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(block,)))


def _draw_block(config: GameConfig, block: int, n: int):
    rng = _block_rng(config.seed, block)
    if config.direct:
        types = None
        s_a = rng.integers(0, 2, size=n)
        q = np.where(s_a == 0, config.belief[0], config.belief[1])
        s_b = (rng.random(n) >= q).astype(np.int64)
    else:
        model = config.belief
        types = rng.choice(len(model.types), size=n, p=np.asarray(model.prior))
        # cell index 2*a + b in row-major order of the 2x2 table
        cdf = np.cumsum(np.asarray(model.conditional_joint).reshape(len(model.types), 4), axis=1)
        cell = (rng.random(n)[:, None] >= cdf[types]).sum(axis=1).clip(0, 3)
        s_a, s_b = cell // 2, cell % 2
    participates = rng.random(n) >= config.pi
    return types, s_a, s_b, participates


def _run_block(config: GameConfig, profiles, block: int, n: int):
    types, s_a, s_b, part = _draw_block(config, block, n)
    rule = config.rule
    r_a = np.empty(n)
    r_b = np.empty(n)
    v = np.empty(n)
    regimes = {r.value: 0 for r in Regime}
    tele = 0.0
    for i in range(n):
        out = play(config, int(s_a[i]), int(s_b[i]), bool(part[i]), profiles[int(s_a[i])])
        r_a[i], r_b[i], v[i] = out.r_A, out.r_B, out.v
        regimes[out.regime.value] += 1
        if out.bob_traded and math.isfinite(out.r_A) and math.isfinite(out.r_B):
            total = payoff(rule, out.p_B, P0, out.v)
            tele = max(tele, abs(out.r_A + out.r_B - total))
    type_counts = None if types is None else np.bincount(types, minlength=len(config.belief.types))
    return r_a, r_b, v, int(part.sum()), regimes, tele, type_counts


def _mean_se(parts: List[np.ndarray]) -> Tuple[float, float]:
    x = np.concatenate(parts)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def simulate(config: GameConfig, workers: int = 1, type_counts: bool = False) -> SimulationReport:
    """Seeded Monte Carlo estimate of payoffs and liquidation value.

    Replications are split into fixed blocks; block ``k`` draws from a stream
    keyed by (seed, k), so the report does not depend on ``workers``.
    """
    if type_counts and config.direct:
        raise ConfigurationError("type counts need a full SignalModel, not direct q0 values")
    profiles = {}
    for s in (0, 1):
        try:
            profiles[s] = solve_equilibrium(config.rule, config.pi, config.q0(s))
        except DomainError:
            if config.direct:
                raise
            profiles[s] = None  # signal has probability zero; never drawn
    n = int(config.replications)
    blocks = [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]
    job = lambda bn: _run_block(config, profiles, *bn)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, blocks))
    else:
        results = [job(bn) for bn in blocks]

    r_a = [r[0] for r in results]
    r_b = [r[1] for r in results]
    v = [r[2] for r in results]
    regimes = {r.value: sum(res[4][r.value] for res in results) for r in Regime}
    counts = None
    if type_counts:
        total = sum(res[6] for res in results)
        counts = {t: int(c) for t, c in zip(config.belief.types, total)}
    mean_ra, se_ra = _mean_se(r_a)
    mean_rb, se_rb = _mean_se(r_b)
    mean_v, se_v = _mean_se(v)
    return SimulationReport(
        replications=n,
        mean_r_A=mean_ra, se_r_A=se_ra,
        mean_r_B=mean_rb, se_r_B=se_rb,
        mean_v=mean_v, se_v=se_v,
        bob_trade_frequency=sum(res[3] for res in results) / n,
        regime_counts=regimes,
        all_finite=bool(all(np.isfinite(x).all() for x in r_a + r_b)),
        max_telescoping_error=max(res[5] for res in results),
        type_counts=counts,
    )


# -- equilibrium certification -------------------------------------------------

def price_grid(step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    if n < 2 or not math.isclose(n * step, 1.0, rel_tol=1e-9):
        raise DomainError(f"grid step must divide 1 evenly, got {step!r}")
    return np.arange(1, n) / n


@dataclass
class DeviationReport:
    profile_price: float
    profile_payoff: float
    best_alternative_price: float
    best_alternative_payoff: float
    max_gap: float
    tolerance: float
    certified: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _curvature_tolerance(rule, pi, q0, price, step) -> float:
    # half the second derivative of Alice's expected score at the profile price, times step^2
    th = solve_thresholds(rule)
    mean_v = sum(v * w for v, w in outcome_distribution(rule, th, pi, q0, price).items())
    h = min(step, price / 2, (1 - price) / 2)
    f = lambda p: score_outcome(rule, p, mean_v)  # noqa: E731
    second = abs(f(price + h) - 2 * f(price) + f(price - h)) / (h * h)
    return 0.5 * second * step * step + 1e-12


def verify_no_deviation(rule, pi: float, q0: float, profile: EquilibriumProfile,
                        price_grid_step: float = 1e-3) -> DeviationReport:
    """Compare the profile's exact payoff with every grid price and abstaining."""
    if not (0.0 < price_grid_step <= 0.1):
        raise DomainError("grid step must lie in (0, 0.1]")
    rule = as_rule(rule)
    th = solve_thresholds(rule)
    own = alice_expected_payoff(rule, th, pi, q0, profile.alice_price)
    best_p, best_r = P0, 0.0
    for p in price_grid(price_grid_step):
        r = alice_expected_payoff(rule, th, pi, q0, float(p))
        if r > best_r:
            best_p, best_r = float(p), r
    gap = best_r - own
    tol = _curvature_tolerance(rule, pi, q0, profile.alice_price, price_grid_step)
    return DeviationReport(profile.alice_price, own, best_p, best_r, gap, tol, gap <= tol)


# -- brute-force oracle --------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    price: float
    payoff: float
    regime_guess: Regime


def _direct_bob_vote(rule, p_a: float, v_a: int) -> int:
    """Bob's vote from comparing his two moves; he then reports p_B = v."""
    collude = payoff(rule, float(v_a), p_a, float(v_a))
    correct = payoff(rule, 0.5, p_a, 0.5)
    # near-ties go to colluding, matching the inclusive threshold
    return v_a if collude >= correct - 1e-9 else 1 - v_a


def _oracle_payoff(rule, pi, q0, p_a: float) -> float:
    if p_a == P0:
        return 0.0
    v_a = 1 if p_a > P0 else 0
    v_bob = (v_a + _direct_bob_vote(rule, p_a, v_a)) / 2
    total = (1.0 - pi) * payoff(rule, p_a, P0, v_bob) if pi < 1.0 else 0.0
    for s_b, w in ((0, pi * q0), (1, pi * (1.0 - q0))):
        if w > 0.0:
            total += w * payoff(rule, p_a, P0, (v_a + s_b) / 2)
    return total


def _bob_switch(rule, collude: float, correct: float, v_a: int) -> float:
    """Collusive end of the switch between two grid neighbours, refined to 1e-13."""
    while abs(correct - collude) > 1e-13:
        mid = 0.5 * (collude + correct)
        if _direct_bob_vote(rule, mid, v_a) == v_a:
            collude = mid
        else:
            correct = mid
    return collude


def brute_force_equilibrium(rule, pi: float, q0: float,
                            price_grid_step: float = 1e-3) -> OracleResult:
    """Exhaustive search for Alice's best price on a grid.

    Alice's payoff jumps where Bob switches from colluding to correcting, and
    the collusive edge of that jump is usually her best price. Those edges
    are located on the grid and then refined, so they are searched too.
    Exact ties (only at pi = 0 or q0 = 1/2) go to the side of 1/2 that q0 favours.
    The regime guess is HPP when a trading Bob would collude at the argmax.
    """
    if not (0.0 < price_grid_step <= 0.01):
        raise DomainError("grid step must lie in (0, 0.01]")
    if not (0.0 <= pi <= 1.0) or not (0.0 <= q0 <= 1.0):
        raise DomainError("pi and q0 must lie in [0,1]")
    rule = as_rule(rule)
    grid = [float(p) for p in price_grid(price_grid_step)]
    votes = [None if p == P0 else _direct_bob_vote(rule, p, int(p > P0)) for p in grid]
    edges = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        if a > P0 and votes[i] == 1 and votes[i + 1] == 0:
            edges.append(_bob_switch(rule, a, b, 1))
        if b < P0 and votes[i] == 1 and votes[i + 1] == 0:
            edges.append(_bob_switch(rule, b, a, 0))

    up = q0 <= 0.5
    favoured = lambda p: p != P0 and (p > P0) == up  # noqa: E731
    best_p, best_r = P0, 0.0
    for p in grid + edges:
        r = _oracle_payoff(rule, pi, q0, p)
        tol = _TIE_TOL * max(1.0, abs(best_r))
        if r > best_r + tol or (r >= best_r - tol and favoured(p) and not favoured(best_p)):
            best_p, best_r = p, r
    collusive = best_p != P0 and _direct_bob_vote(rule, best_p, int(best_p > P0)) == int(best_p > P0)
    return OracleResult(best_p, best_r, Regime.HPP if collusive else Regime.LPP)
