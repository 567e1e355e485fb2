import dataclasses
import math

import pytest

from manipmarket.beliefs import SignalModel
from manipmarket.equilibrium import Regime, solve_equilibrium
from manipmarket.errors import ConfigurationError, DomainError
from manipmarket.game import (
    GameConfig,
    brute_force_equilibrium,
    play,
    simulate,
    verify_no_deviation,
)
from manipmarket.scoring import ScoringRule, payoff

RULES = list(ScoringRule)


def cfg(rule="quadratic", pi=0.9, q0=0.25, **kw):
    return GameConfig(rule, pi, (q0, q0), **kw)


class TestPlay:
    def test_bob_colludes(self):
        out = play(cfg(), 1, 0, True)
        assert out.p_A == pytest.approx(0.75, abs=1e-9)
        assert (out.p_B, out.v_A, out.v_B, out.v) == (1.0, 1, 1, 1.0)
        assert out.r_A == pytest.approx(0.1875, abs=1e-9)
        assert out.r_B == pytest.approx(0.0625, abs=1e-9)
        assert out.r_A + out.r_B == pytest.approx(0.25, abs=1e-12)

    def test_bob_absent(self):
        out = play(cfg(), 1, 0, False)
        assert out.p_B == out.p_A and out.v_B == 0 and out.v == 0.5
        assert out.r_A == pytest.approx(-0.0625, abs=1e-9)
        assert out.r_B == 0.0

    @pytest.mark.parametrize("rule", RULES)
    def test_liquidation_is_mean_vote(self, rule):
        for s_a in (0, 1):
            for s_b in (0, 1):
                for part in (True, False):
                    out = play(GameConfig(rule, 0.5, (0.3, 0.7)), s_a, s_b, part)
                    assert out.v == (out.v_A + out.v_B) / 2
                    if part:
                        assert out.r_A + out.r_B == pytest.approx(
                            payoff(rule, out.p_B, 0.5, out.v), abs=1e-9)
                    else:
                        assert out.v_B == s_b and out.p_B == out.p_A

    def test_config_validation(self):
        with pytest.raises(DomainError):
            cfg(pi=1.5)
        with pytest.raises(DomainError):
            cfg(replications=0)
        with pytest.raises(DomainError):
            GameConfig("quadratic", 0.5, (0.2, 1.2))


class TestSimulate:
    def test_hpp_mean_payoff(self):
        rep = simulate(cfg(seed=7, replications=100_000))
        assert abs(rep.mean_r_A - 0.13125) <= 3 * rep.se_r_A
        assert rep.regime_counts == {"LPP": 0, "HPP": 100_000}
        assert rep.max_telescoping_error <= 1e-9
        assert rep.se_r_A >= 0 and 0 <= rep.bob_trade_frequency <= 1

    def test_no_trade_when_pi_is_one(self):
        rep = simulate(cfg(pi=1.0, seed=3, replications=5000))
        assert rep.bob_trade_frequency == 0.0
        assert rep.mean_r_B == 0.0

    def test_seed_determinism_and_workers(self):
        c = cfg(seed=11, replications=10_000)
        a, b = simulate(c), simulate(c)
        assert a == b
        assert simulate(c, workers=3) == a
        assert simulate(dataclasses.replace(c, seed=12)) != a

    def test_signal_model_mode(self):
        m = SignalModel.conditionally_independent(0.8)
        rep = simulate(GameConfig("spherical", 0.95, m, seed=5, replications=20_000), type_counts=True)
        assert sum(rep.type_counts.values()) == 20_000
        assert rep.all_finite

    def test_type_counts_need_a_model(self):
        with pytest.raises(ConfigurationError):
            simulate(cfg(replications=10), type_counts=True)

    @pytest.mark.parametrize("rule", RULES)
    def test_equilibrium_path_is_finite(self, rule):
        for pi in (0.0, 0.9, 0.99, 1.0):
            assert simulate(GameConfig(rule, pi, (0.2, 0.8), seed=1, replications=4000)).all_finite

    def test_lpp_mean_value_is_price(self):
        rep = simulate(cfg(pi=0.98, seed=2, replications=100_000))
        assert abs(rep.mean_v - 0.8675) <= 3 * rep.se_v


class TestDeviation:
    def test_hpp_profile_certified(self):
        prof = solve_equilibrium("quadratic", 0.9, 0.25)
        rep = verify_no_deviation("quadratic", 0.9, 0.25, prof, 1e-3)
        assert rep.certified and rep.max_gap <= rep.tolerance

    def test_on_grid_profile_has_zero_gap(self):
        prof = solve_equilibrium("quadratic", 1.0, 0.25)
        assert prof.alice_price == 0.875
        rep = verify_no_deviation("quadratic", 1.0, 0.25, prof, 1e-3)
        assert rep.best_alternative_price == 0.875
        assert rep.max_gap == 0.0

    def test_wrong_profile_detected(self):
        wrong = dataclasses.replace(solve_equilibrium("quadratic", 0.98, 0.25), alice_price=0.75)
        rep = verify_no_deviation("quadratic", 0.98, 0.25, wrong, 1e-3)
        assert rep.max_gap > rep.tolerance and not rep.certified

    def test_step_domain(self):
        prof = solve_equilibrium("quadratic", 0.9, 0.25)
        with pytest.raises(DomainError):
            verify_no_deviation("quadratic", 0.9, 0.25, prof, 0.2)


class TestOracle:
    def test_hpp_point(self):
        r = brute_force_equilibrium("quadratic", 0.9, 0.25, 1e-3)
        assert abs(r.price - 0.75) <= 1e-3 and r.regime_guess is Regime.HPP

    def test_lpp_point(self):
        r = brute_force_equilibrium("quadratic", 0.98, 0.25, 1e-3)
        assert abs(r.price - 0.8675) <= 1e-3 and r.regime_guess is Regime.LPP

    @pytest.mark.parametrize("rule", RULES)
    def test_mirror(self, rule):
        for pi in (0.3, 0.97):
            a = brute_force_equilibrium(rule, pi, 0.2, 1e-3)
            b = brute_force_equilibrium(rule, pi, 0.8, 1e-3)
            assert a.price + b.price == pytest.approx(1.0, abs=1e-9)
            assert a.payoff == pytest.approx(b.payoff, abs=1e-9)

    def test_certain_participation_tie_goes_to_favoured_side(self):
        assert brute_force_equilibrium("quadratic", 0.0, 0.25, 1e-3).price > 0.5
        assert brute_force_equilibrium("quadratic", 0.0, 0.75, 1e-3).price < 0.5
