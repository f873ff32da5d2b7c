"""Approximate best-response oracles with query accounting.

One query is one evaluation of a mixture objective or of its gradient, the
cost model used to compare training algorithms at equal budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Agent, Population
from .validation import check_random_state, check_weights

FD_STEP = 1e-5


class OracleError(ArithmeticError):
    pass


@dataclass
class OracleBudget:
    """Oracle hyperparameters plus a running query counter."""

    step_count: int = 50
    step_size: float = 0.1
    epsilon: float = 1e-6
    queries_used: int = 0

    def __post_init__(self):
        if self.step_count < 0:
            raise ValueError("step_count must be >= 0")
        if self.step_size < 0 or self.epsilon < 0:
            raise ValueError("step_size and epsilon must be >= 0")

    def charge(self, n=1):
        if n < 0:
            raise ValueError("cannot refund queries")
        self.queries_used += int(n)


def fd_gradient(f, x, h=FD_STEP):
    """Central finite-difference gradient of ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


@dataclass(frozen=True)
class MixtureObjective:
    """``v -> sum_i w_i phi(v, opp_i)``, optionally with each payoff clamped at zero.

    Terms with zero weight are skipped, so a point-mass mixture is exactly the
    payoff against that single opponent.
    """

    opponents: Population
    weights: np.ndarray
    rectified: bool
    game: object = field(repr=False)

    def __post_init__(self):
        w = check_weights(self.weights, len(self.opponents))
        if not self.rectified and abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("unrectified objective weights must sum to one")
        object.__setattr__(self, "weights", w)

    def _terms(self):
        return [(w, a.params) for w, a in zip(self.weights, self.opponents) if w > 0]

    def evaluate(self, v) -> float:
        params = v.params if isinstance(v, Agent) else np.asarray(v, dtype=float)
        total = 0.0
        for w, opp in self._terms():
            val = float(self.game.phi(params, opp, None))
            if self.rectified:
                val = max(val, 0.0)
            total += w * val
        return total

    __call__ = evaluate

    def gradient(self, v, h=FD_STEP) -> np.ndarray:
        """Gradient in ``v``.

        In the rectified objective, terms the agent loses (``phi < 0``)
        contribute nothing.  Ties (``phi == 0``) contribute the ascent-side
        gradient, so an agent that only ties itself still trains against
        itself, as rectified training must when a single agent holds the
        whole Nash mass.
        """
        params = v.params if isinstance(v, Agent) else np.asarray(v, dtype=float)
        g = np.zeros_like(params, dtype=float)
        grad = getattr(self.game, "grad", None)
        for w, opp in self._terms():
            if self.rectified and float(self.game.phi(params, opp, None)) < 0.0:
                continue
            if grad is not None:
                gi = np.asarray(grad(params, opp), dtype=float)
            else:
                gi = fd_gradient(lambda x: float(self.game.phi(x, opp, None)), params, h)
            g = g + w * gi
        if not np.all(np.isfinite(g)):
            raise OracleError("non-finite gradient")
        return g


def mixture_objective(pop: Population, weights, rectified, game) -> MixtureObjective:
    return MixtureObjective(pop, np.asarray(weights, dtype=float), bool(rectified), game)


@dataclass(frozen=True)
class OracleResult:
    agent: Agent
    improved: bool
    start_value: float
    end_value: float
    queries: int


def _project(game, params):
    project = getattr(game, "project", None)
    return params if project is None else np.asarray(project(params), dtype=float)


def gradient_ascent_oracle(v: Agent, obj: MixtureObjective, budget: OracleBudget,
                           rng=None, tag=None) -> OracleResult:
    """``step_count`` projected gradient steps from ``v``.

    Costs one query per gradient plus two for the improvement test.
    """
    start = budget.queries_used
    x = v.params.copy()
    for _ in range(budget.step_count):
        g = obj.gradient(x)
        budget.charge()
        x = _project(obj.game, x + budget.step_size * g)
    if budget.step_count == 0:
        new = v
    else:
        new = v.with_params(x, tag)
    before = obj.evaluate(v)
    after = obj.evaluate(new)
    budget.charge(2)
    return OracleResult(new, after > before + budget.epsilon, before, after,
                        budget.queries_used - start)


def evolutionary_oracle(v: Agent, obj: MixtureObjective, budget: OracleBudget, rng=None,
                        tag=None, offspring=8, sigma0=0.5, patience=10) -> OracleResult:
    """(1 + offspring) evolution strategy with Gaussian mutations.

    ``step_count`` is the number of generations.  The best child replaces the
    parent when it is at least as good; the mutation scale halves after
    ``patience`` generations without strict improvement.
    """
    rng = check_random_state(rng)
    start = budget.queries_used
    x = v.params.copy()
    fx = obj.evaluate(x)
    budget.charge()
    before = fx
    sigma = sigma0
    stale = 0
    for _ in range(budget.step_count):
        kids = x[None, :] + sigma * rng.standard_normal((offspring, x.size))
        kids = np.array([_project(obj.game, k) for k in kids])
        vals = np.array([obj.evaluate(k) for k in kids])
        budget.charge(offspring)
        best = int(np.argmax(vals))
        if vals[best] > fx:
            stale = 0
        else:
            stale += 1
        if vals[best] >= fx:
            x, fx = kids[best], float(vals[best])
        if stale >= patience:
            sigma *= 0.5
            stale = 0
    new = v if budget.step_count == 0 else v.with_params(x, tag)
    return OracleResult(new, fx > before + budget.epsilon, before, fx,
                        budget.queries_used - start)


ORACLES = {"gradient": gradient_ascent_oracle, "evolutionary": evolutionary_oracle}


@dataclass(frozen=True)
class Oracle:
    """Oracle choice and hyperparameters; each call gets its own budget."""

    kind: str = "gradient"
    step_count: int = 50
    step_size: float = 0.1
    epsilon: float = 1e-6
    offspring: int = 8
    sigma0: float = 0.5
    patience: int = 10

    def __post_init__(self):
        if self.kind not in ORACLES:
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if self.step_count < 0 or self.offspring < 1 or self.patience < 1:
            raise ValueError("invalid oracle hyperparameters")

    def queries_for(self, steps):
        """Queries consumed by one call running ``steps`` steps."""
        if self.kind == "gradient":
            return steps + 2
        return 1 + self.offspring * steps

    def steps_for(self, queries):
        """Most steps one call can run within ``queries`` (at least one)."""
        if self.kind == "gradient":
            steps = queries - 2
        else:
            steps = (queries - 1) // self.offspring
        return max(1, int(steps))

    def __call__(self, v, obj, rng=None, steps=None, tag=None) -> OracleResult:
        budget = OracleBudget(self.step_count if steps is None else steps,
                              self.step_size, self.epsilon)
        if self.kind == "gradient":
            return gradient_ascent_oracle(v, obj, budget, rng, tag)
        return evolutionary_oracle(v, obj, budget, rng, tag, self.offspring,
                                   self.sigma0, self.patience)
