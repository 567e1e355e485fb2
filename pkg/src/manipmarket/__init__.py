"""Equilibria of a two-trader prediction market whose traders also vote on the outcome."""

__version__ = "0.1.0"

from .beliefs import SignalModel, posterior_q0, stochastically_relevant
from .equilibrium import (
    EquilibriumProfile,
    Regime,
    crossover_curve,
    crossover_probability,
    solve_equilibrium,
)
from .game import GameConfig, brute_force_equilibrium, play, simulate, verify_no_deviation
from .inference import classify_informativeness, fixed_point_residual, recover_signal
from .scoring import ScoringRule, payoff, score, score_outcome
from .thresholds import Thresholds, solve_thresholds

__all__ = [
    "EquilibriumProfile", "GameConfig", "Regime", "ScoringRule", "SignalModel", "Thresholds",
    "brute_force_equilibrium", "classify_informativeness", "crossover_curve",
    "crossover_probability", "fixed_point_residual", "payoff", "play", "posterior_q0",
    "recover_signal", "score", "score_outcome", "simulate", "solve_equilibrium",
    "solve_thresholds", "stochastically_relevant", "verify_no_deviation",
]
