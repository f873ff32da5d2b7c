import numpy as np
import pytest

from ffgames.core import Agent, Population
from ffgames.games import blotto_game, disc_game, rps_embedding, transitive_game
from ffgames.oracles import (Oracle, OracleBudget, OracleError, fd_gradient,
                             gradient_ascent_oracle, evolutionary_oracle, mixture_objective)

RPS = rps_embedding(1.0)


def test_rps_objectives():
    g = disc_game()
    rock = RPS[0]
    plain = mixture_objective(RPS, np.full(3, 1 / 3), False, g)
    rect = mixture_objective(RPS, np.full(3, 1 / 3), True, g)
    assert plain(rock) == pytest.approx(0.0, abs=1e-15)
    # Rock beats exactly one of the three with payoff 1.
    assert rect(rock) == pytest.approx(1 / 3, abs=1e-15)


def test_objective_is_linear_in_weights():
    g = disc_game()
    v = np.array([0.3, -0.7])
    w1, w2 = np.array([0.2, 0.5, 0.3]), np.array([0.6, 0.1, 0.3])
    f1 = mixture_objective(RPS, w1, False, g)(v)
    f2 = mixture_objective(RPS, w2, False, g)(v)
    mid = mixture_objective(RPS, (w1 + w2) / 2, False, g)(v)
    assert mid == pytest.approx((f1 + f2) / 2, abs=1e-14)


def test_objective_weight_checks():
    with pytest.raises(ValueError):
        mixture_objective(RPS, [0.5, 0.5, 0.5], False, disc_game())
    with pytest.raises(ValueError):
        mixture_objective(RPS, [1.0, 0.0], False, disc_game())
    # Rectified weights need not be normalized.
    mixture_objective(RPS, [1.0, 1.0, 0.0], True, disc_game())


def test_gradient_matches_finite_differences():
    g = disc_game()
    obj = mixture_objective(RPS, [0.2, 0.5, 0.3], False, g)
    v = np.array([0.4, 0.1])
    assert np.abs(obj.gradient(v) - fd_gradient(obj.evaluate, v)).max() < 1e-8
    # A game without an analytic gradient falls back to finite differences.
    bare = type(g)(g.game_id, 2, g.phi)
    obj2 = mixture_objective(RPS, [0.2, 0.5, 0.3], False, bare)
    assert np.abs(obj2.gradient(v) - obj.gradient(v)).max() < 1e-8


def test_rectified_gradient_skips_losing_terms():
    g = disc_game()
    # Rock's zero weight drops its tie with itself.
    obj = mixture_objective(RPS, [0.0, 1.0, 1.0], True, g)
    rock = RPS[0].params
    # Only the opponent rock beats contributes; its disc gradient is (w2, -w1).
    beaten = [a.params for a in RPS if g.phi(rock, a.params) > 0]
    assert len(beaten) == 1
    w = beaten[0]
    assert np.abs(obj.gradient(rock) - np.array([w[1], -w[0]])).max() < 1e-15


def test_rectified_gradient_keeps_ties():
    g = transitive_game()
    pop = Population.from_params("transitive", [[1.0]])
    obj = mixture_objective(pop, [1.0], True, g)
    assert np.array_equal(obj.gradient(np.array([1.0])), [1.0])
    assert np.array_equal(obj.gradient(np.array([0.5])), [0.0])


def test_gradient_oracle_on_transitive_game():
    g = transitive_game()
    pop = Population.from_params("transitive", [[0.0]])
    obj = mixture_objective(pop, [1.0], False, g)
    budget = OracleBudget(step_count=50, step_size=0.1)
    res = gradient_ascent_oracle(pop[0], obj, budget)
    x = 0.0
    for _ in range(50):
        x = x + 0.1 * 1.0
    assert res.agent.params[0] == x
    assert res.queries == 52 and budget.queries_used == 52
    assert res.improved and res.end_value == x


def test_zero_steps_returns_same_agent():
    g = transitive_game()
    pop = Population.from_params("transitive", [[0.0]])
    obj = mixture_objective(pop, [1.0], False, g)
    res = Oracle(step_count=0)(pop[0], obj)
    assert res.agent is pop[0] and not res.improved and res.queries == 2


def test_nonfinite_gradient_raises():
    g = transitive_game(rating=lambda x: float(x[0]), rating_grad=lambda x: np.array([np.inf]))
    pop = Population.from_params("transitive", [[0.0]])
    with pytest.raises(OracleError):
        Oracle(step_count=3)(pop[0], mixture_objective(pop, [1.0], False, g))


def test_evolutionary_oracle_beats_concentrated_blotto():
    g = blotto_game(3, 10)
    opp = Population.from_params(g.game_id, [[20.0, 0.0, 0.0]])
    start = Agent(g.game_id, [3.0, 0.0, 0.0])
    obj = mixture_objective(opp, [1.0], False, g)
    assert obj(start) == 0.0
    res = Oracle("evolutionary", step_count=20)(start, obj, rng=0)
    assert res.end_value > 0 and res.improved
    assert res.queries == 1 + 8 * 20
    again = Oracle("evolutionary", step_count=20)(start, obj, rng=0)
    assert np.array_equal(again.agent.params, res.agent.params)


def test_evolutionary_never_worsens():
    g = disc_game(1.0)
    pop = Population.from_params(g.game_id, RPS.params)
    obj = mixture_objective(pop, [0.5, 0.25, 0.25], False, g)
    start = Agent(g.game_id, [0.1, 0.2])
    budget = OracleBudget(step_count=15)
    res = evolutionary_oracle(start, obj, budget, rng=3)
    assert res.end_value >= res.start_value


def test_query_accounting_helpers():
    grad = Oracle(step_count=50)
    assert grad.queries_for(50) == 52 and grad.steps_for(52) == 50
    es = Oracle("evolutionary", step_count=10, offspring=4)
    assert es.queries_for(10) == 41 and es.steps_for(41) == 10
    assert es.steps_for(2) == 1
    with pytest.raises(ValueError):
        Oracle("annealing")
    with pytest.raises(ValueError):
        OracleBudget().charge(-1)
