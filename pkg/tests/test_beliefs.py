import json
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from manipmarket.beliefs import (
    SignalModel,
    posterior,
    posterior_q0,
    stochastically_relevant,
)
from manipmarket.errors import UndefinedPosteriorError, ValidationError


def brute_q0(model, s_a):
    # enumerate (type, a, b) triples directly
    num = den = 0.0
    for t, a, b in itertools.product(range(len(model.types)), (0, 1), (0, 1)):
        w = model.prior[t] * model.conditional_joint[t][a][b]
        if a == s_a:
            den += w
            if b == 0:
                num += w
    return num / den


def test_accuracy_model():
    m = SignalModel.conditionally_independent(0.8)
    assert posterior_q0(m, 0) == pytest.approx(0.68, abs=1e-12)
    assert posterior_q0(m, 1) == pytest.approx(0.32, abs=1e-12)
    assert posterior_q0(m, 0) == pytest.approx(brute_q0(m, 0), abs=1e-15)
    assert stochastically_relevant(m, 1e-6)


def test_independent_signals():
    table = [[0.5 * 0.3, 0.5 * 0.7], [0.5 * 0.3, 0.5 * 0.7]]
    m = SignalModel(["x", "y"], [0.4, 0.6], [table, table])
    assert posterior_q0(m, 0) == pytest.approx(0.3)
    assert posterior_q0(m, 1) == pytest.approx(0.3)
    assert not stochastically_relevant(m, 1e-6)


def test_uninformative_signals():
    assert not stochastically_relevant(SignalModel.conditionally_independent(0.5), 1e-6)


def test_point_mass():
    m = SignalModel(["only"], [1.0], [[[1.0, 0.0], [0.0, 0.0]]])
    assert posterior_q0(m, 0) == 1.0
    with pytest.raises(UndefinedPosteriorError):
        posterior_q0(m, 1)
    assert posterior(m).q0_given_sA1 is None
    with pytest.raises(UndefinedPosteriorError):
        stochastically_relevant(m)


@pytest.mark.parametrize("data, field", [
    ({"types": [], "prior": [], "conditional_joint": []}, "types"),
    ({"types": ["a"], "prior": [0.9], "conditional_joint": [[[0.25, 0.25], [0.25, 0.25]]]}, "prior"),
    ({"types": ["a", "b"], "prior": [1.5, -0.5],
      "conditional_joint": [[[1, 0], [0, 0]], [[1, 0], [0, 0]]]}, "prior[1]"),
    ({"types": ["a"], "prior": [1.0], "conditional_joint": [[[0.5, 0.5], [0.5, 0.5]]]},
     "conditional_joint[0]"),
    ({"types": ["a"], "prior": [1.0], "conditional_joint": [[[0.5, 0.5, 0.0], [0, 0]]]},
     "conditional_joint[0]"),
    ({"types": ["a"], "prior": [1.0]}, "conditional_joint"),
])
def test_validation_names_field(data, field):
    with pytest.raises(ValidationError) as exc:
        SignalModel.from_dict(data)
    assert exc.value.field == field


def test_rounding_tolerance_accepted():
    SignalModel(["a", "b"], [0.3333333333, 0.6666666667],
                [[[0.25, 0.25], [0.25, 0.25]], [[0.1, 0.2], [0.3, 0.4]]])


def test_json_round_trip(tmp_path):
    m = SignalModel.conditionally_independent(0.7, prior=(0.2, 0.8))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(m.to_dict()))
    assert SignalModel.load(path) == m


@st.composite
def models(draw):
    n = draw(st.integers(1, 4))
    w = st.floats(0.01, 1.0)
    prior = [draw(w) for _ in range(n)]
    tables = []
    for _ in range(n):
        cells = [draw(w) for _ in range(4)]
        s = sum(cells)
        tables.append([[cells[0] / s, cells[1] / s], [cells[2] / s, cells[3] / s]])
    s = sum(prior)
    return SignalModel([str(i) for i in range(n)], [x / s for x in prior], tables)


@settings(max_examples=200, deadline=None)
@given(models())
def test_total_probability(m):
    lhs = sum(m.marginal_alice(s) * posterior_q0(m, s) for s in (0, 1))
    direct = sum(m.prior[t] * (m.conditional_joint[t][0][0] + m.conditional_joint[t][1][0])
                 for t in range(len(m.types)))
    assert lhs == pytest.approx(direct, abs=1e-9)
    for s in (0, 1):
        assert posterior_q0(m, s) == pytest.approx(brute_q0(m, s), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(models(), st.randoms())
def test_relabeling_invariance(m, rnd):
    order = list(range(len(m.types)))
    rnd.shuffle(order)
    perm = SignalModel([m.types[i] for i in order], [m.prior[i] for i in order],
                       [m.conditional_joint[i] for i in order])
    for s in (0, 1):
        assert posterior_q0(perm, s) == pytest.approx(posterior_q0(m, s), abs=1e-12)
