"""Command-line front end.

JSON output is an envelope ``{command, parameters, results, artifact_version}``;
floats are written with ``repr`` precision (17 significant digits). CSV output
rounds probabilities to 4 decimals for ``thresholds`` and 6 for ``crossover``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from typing import Callable, List, Optional

from . import __version__
from .beliefs import SignalModel
from .equilibrium import (
    EquilibriumProfile,
    Regime,
    crossover_curve,
    crossover_probability,
    default_q0_grid,
    solve_equilibrium,
)
from .errors import ManipMarketError
from .game import GameConfig, brute_force_equilibrium, simulate, verify_no_deviation
from .inference import classify_informativeness, recover_signal
from .scoring import ScoringRule
from .thresholds import solve_thresholds

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Once(argparse.Action):
    """Store a flag value, refusing to see the same flag twice."""

    def __call__(self, parser, namespace, values, option_string=None):
        seen = getattr(namespace, "_seen", None)
        if seen is None:
            seen = set()
            setattr(namespace, "_seen", seen)
        if self.dest in seen:
            parser.error(f"argument {option_string}: given more than once")
        seen.add(self.dest)
        setattr(namespace, self.dest, values)


def _probability(name):
    def parse(text):
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not (0.0 <= x <= 1.0) or math.isnan(x):
            raise argparse.ArgumentTypeError(f"{name} must lie in [0,1]")
        return x
    return parse


def _positive(kind, name):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not x > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return x
    return parse


def _rule(text):
    try:
        return ScoringRule.parse(text)
    except ManipMarketError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _seed(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manipmarket", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, default_format="json"):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=("json", "csv"), default=default_format, action=_Once)
        return p

    def flag(p, *names, **kw):
        p.add_argument(*names, action=_Once, **kw)

    p = add("thresholds", "Bob's vote-flip thresholds per scoring rule", "csv")
    flag(p, "--rule", type=_rule, help="one rule (default: all three)")
    flag(p, "--tol", type=_positive(float, "tol"), default=1e-10)

    p = add("crossover", "crossover probability pi_c over a q0 grid", "csv")
    flag(p, "--rule", type=_rule, required=True)
    flag(p, "--grid", type=_positive(int, "grid"), default=99,
         help="N points q0 = k/(N+1), with 1/2 dropped (default 99)")
    flag(p, "--tol", type=_positive(float, "tol"), default=1e-10)

    p = add("equilibrium", "equilibrium profile for one (rule, pi, q0)")
    _game_flags(p, flag)

    p = add("simulate", "seeded Monte Carlo run")
    flag(p, "--rule", type=_rule, required=True)
    flag(p, "--pi", type=_probability("pi"), required=True)
    flag(p, "--q0", type=_probability("q0"), help="direct q0 for both signals")
    flag(p, "--model", help="SignalModel JSON file (instead of --q0)")
    flag(p, "--n", type=_positive(int, "n"), default=100_000)
    flag(p, "--seed", type=_seed, default=0)
    flag(p, "--workers", type=_positive(int, "workers"), default=1)

    for name, help_ in (("verify", "certify no profitable deviation on a price grid"),
                        ("oracle", "brute-force equilibrium search")):
        p = add(name, help_)
        _game_flags(p, flag)
        flag(p, "--step", type=_positive(float, "step"), default=1e-3)

    p = add("recover", "recover Alice's signal from her price")
    flag(p, "--model", required=True)
    flag(p, "--rule", type=_rule, required=True)
    flag(p, "--pi", type=_probability("pi"), required=True)
    flag(p, "--observed", type=_probability("observed"), required=True)

    p = add("informativeness", "label what each price conveys")
    _game_flags(p, flag)
    flag(p, "--bob-traded", type=_bool, required=True)

    add("reproduce", "check the published values; exit 2 on mismatch", "csv")
    return parser


def _game_flags(p, flag):
    flag(p, "--rule", type=_rule, required=True)
    flag(p, "--pi", type=_probability("pi"), required=True)
    flag(p, "--q0", type=_probability("q0"), required=True)


# -- output ----------------------------------------------------------------------

def _envelope(command, parameters, results):
    return {"command": command, "parameters": parameters, "results": results,
            "artifact_version": __version__}


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "value") and isinstance(x, str):
        return x.value
    return x


def _emit(out, fmt, command, parameters, results, rows: Optional[Callable[[], List[list]]] = None):
    if fmt == "json" or rows is None:
        json.dump(_jsonable(_envelope(command, parameters, results)), out, indent=2)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        for row in rows():
            w.writerow(row)


def _flat_rows(d: dict, prefix=""):
    rows = []
    for k, v in d.items():
        if isinstance(v, dict):
            rows.extend(_flat_rows(v, f"{prefix}{k}."))
        else:
            rows.append([f"{prefix}{k}", v])
    return rows


def _r(x, digits):
    return f"{round(x, digits):.{digits}f}".rstrip("0").rstrip(".") if math.isfinite(x) else str(x)


# -- commands --------------------------------------------------------------------

def _cmd_thresholds(a, out):
    rules = [a.rule] if a.rule else list(ScoringRule)
    res = [{"rule": r.value, **vars(solve_thresholds(r, a.tol))} for r in rules]
    _emit(out, a.format, "thresholds", {"rule": [r.value for r in rules], "tol": a.tol}, res,
          lambda: [[d["rule"], _r(d["p_L"], 4), _r(d["p_H"], 4)] for d in res])


def _cmd_crossover(a, out):
    grid = default_q0_grid(a.grid)
    curve = crossover_curve(a.rule, grid, a.tol)
    res = [{"q0": q, "pi_c": p} for q, p in curve]
    _emit(out, a.format, "crossover", {"rule": a.rule.value, "grid": a.grid, "tol": a.tol}, res,
          lambda: [["q0", "pi_c"]] + [[_r(q, 6), _r(p, 6)] for q, p in curve])


def _params(a, *names):
    return {n: (getattr(a, n).value if isinstance(getattr(a, n), ScoringRule) else getattr(a, n))
            for n in names}


def _cmd_equilibrium(a, out):
    prof = solve_equilibrium(a.rule, a.pi, a.q0)
    d = prof.to_dict()
    _emit(out, a.format, "equilibrium", _params(a, "rule", "pi", "q0"), d, lambda: _flat_rows(d))


def _cmd_simulate(a, out):
    if (a.q0 is None) == (a.model is None):
        raise UsageError("simulate: give exactly one of --q0 or --model")
    belief = SignalModel.load(a.model) if a.model else (a.q0, a.q0)
    cfg = GameConfig(a.rule, a.pi, belief, seed=a.seed, replications=a.n)
    rep = simulate(cfg, workers=a.workers, type_counts=a.model is not None)
    d = rep.to_dict()
    _emit(out, a.format, "simulate", _params(a, "rule", "pi", "q0", "model", "n", "seed"), d,
          lambda: _flat_rows(d))


def _cmd_verify(a, out):
    prof = solve_equilibrium(a.rule, a.pi, a.q0)
    d = {"profile": prof.to_dict(), **verify_no_deviation(a.rule, a.pi, a.q0, prof, a.step).to_dict()}
    _emit(out, a.format, "verify", _params(a, "rule", "pi", "q0", "step"), d, lambda: _flat_rows(d))


def _cmd_oracle(a, out):
    res = brute_force_equilibrium(a.rule, a.pi, a.q0, a.step)
    d = {"price": res.price, "payoff": res.payoff, "regime_guess": res.regime_guess.value}
    _emit(out, a.format, "oracle", _params(a, "rule", "pi", "q0", "step"), d, lambda: _flat_rows(d))


def _cmd_recover(a, out):
    model = SignalModel.load(a.model)
    d = recover_signal(model, a.rule, a.pi, a.observed).to_dict()
    _emit(out, a.format, "recover", _params(a, "model", "rule", "pi", "observed"), d,
          lambda: _flat_rows(d))


def _cmd_informativeness(a, out):
    prof = solve_equilibrium(a.rule, a.pi, a.q0)
    labels = [x.to_dict() for x in classify_informativeness(prof, a.bob_traded)]
    _emit(out, a.format, "informativeness", _params(a, "rule", "pi", "q0", "bob_traded"),
          {"regime": prof.regime.value, "labels": labels},
          lambda: [["stage", "label"]] + [[x["stage"], x["label"]] for x in labels])


def reproduction_checks():
    """(name, expected, got, tolerance) for each published value."""
    checks = []
    table = {ScoringRule.LOGARITHMIC: (0.2, 0.8), ScoringRule.QUADRATIC: (0.25, 0.75),
             ScoringRule.SPHERICAL: (0.2725, 0.7275)}
    for rule, (pl, ph) in table.items():
        th = solve_thresholds(rule)
        checks.append((f"p_L {rule.value}", pl, th.p_L, 5e-4))
        checks.append((f"p_H {rule.value}", ph, th.p_H, 5e-4))
    pi_c = crossover_probability(ScoringRule.QUADRATIC, 0.25).pi_c
    checks.append(("pi_c quadratic q0=0.25", 0.9537, pi_c, 5e-4))
    checks.append(("pi_c quadratic root of 9x^2+4x-12", (-4 + math.sqrt(448)) / 18, pi_c, 1e-8))
    hpp = solve_equilibrium(ScoringRule.QUADRATIC, 0.9, 0.25)
    checks.append(("HPP price quadratic pi=0.9 q0=0.25", 0.75, hpp.alice_price, 1e-9))
    checks.append(("HPP regime quadratic pi=0.9 q0=0.25", 1.0,
                   float(hpp.regime is Regime.HPP), 0.0))
    for pi in (0.96, 0.98, 1.0):
        prof = solve_equilibrium(ScoringRule.QUADRATIC, pi, 0.25)
        expected = (1 + pi * 0.75) / 2
        got = prof.alice_price if prof.regime is Regime.LPP else math.nan
        checks.append((f"LPP price quadratic pi={pi} q0=0.25", expected, got, 1e-9))
    return checks


def _cmd_reproduce(a, out):
    t0 = time.perf_counter()
    checks = reproduction_checks()
    rows = []
    ok_all = True
    for name, expected, got, tol in checks:
        ok = abs(got - expected) <= tol
        ok_all &= ok
        rows.append({"check": name, "expected": expected, "got": got, "tolerance": tol,
                     "status": "PASS" if ok else "FAIL"})
    _emit(out, a.format, "reproduce", {"elapsed_s": time.perf_counter() - t0}, rows,
          lambda: [["check", "expected", "got", "tolerance", "status"]]
          + [[r["check"], r["expected"], repr(r["got"]), r["tolerance"], r["status"]] for r in rows])
    return EXIT_OK if ok_all else EXIT_MISMATCH


COMMANDS = {
    "thresholds": _cmd_thresholds,
    "crossover": _cmd_crossover,
    "equilibrium": _cmd_equilibrium,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "recover": _cmd_recover,
    "informativeness": _cmd_informativeness,
    "reproduce": _cmd_reproduce,
}


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code = COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_INVALID
    except (ManipMarketError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK if code is None else code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
