"""Training loops: fixed opponent, self-play and the PSRO family.

Every trainer appends to its population and never edits existing agents, so
the population after iteration ``t`` is a prefix of the final one; the run log
refers to snapshots by their population size.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from .core import Agent, EvalConfig, EvalMatrix, Population, build_eval_matrix, extend_eval_matrix
from .gamescape import schur_embedding
from .metrics import effective_diversity, relative_performance
from .nash import NashMixture, duplicate_classes, max_entropy_nash, solve_zero_sum
from .oracles import Oracle, mixture_objective

log = logging.getLogger(__name__)

ALGORITHMS = ("self_play", "psro_n", "psro_u", "psro_rn")
SUPPORT_THRESHOLD = 1e-6
DUPLICATE_TOL = 1e-9


class PsroError(RuntimeError):
    def __init__(self, message, iteration=None, run_log=None):
        super().__init__(message)
        self.iteration = iteration
        self.run_log = run_log


@dataclass(frozen=True)
class PsroState:
    game: object = field(repr=False)
    population: Population
    eval: EvalMatrix
    nash: NashMixture
    iteration: int = 0
    queries: int = 0
    eval_cfg: EvalConfig = EvalConfig()


@dataclass(frozen=True)
class StepReport:
    """What one training step did (alongside the new state)."""

    trained: tuple
    improved: tuple
    queries: int
    redundant: tuple

    @property
    def converged(self):
        return bool(self.trained) and not any(self.improved)


def init_state(game, population: Population, eval_cfg: EvalConfig | None = None) -> PsroState:
    eval_cfg = eval_cfg or EvalConfig()
    A = build_eval_matrix(game, population, eval_cfg)
    return PsroState(game, population, A, max_entropy_nash(A.entries), 0, 0, eval_cfg)


def _append(state: PsroState, agents, queries) -> PsroState:
    pop = state.population.extend(agents)
    A = extend_eval_matrix(state.game, state.eval, pop, state.eval_cfg)
    return PsroState(state.game, pop, A, max_entropy_nash(A.entries), state.iteration + 1,
                     state.queries + queries, state.eval_cfg)


def _duplicate_flags(A: EvalMatrix, n_old):
    """Mark new rows that match an earlier row within ``DUPLICATE_TOL``."""
    M = A.entries
    flags = []
    for r in range(n_old, M.shape[0]):
        diff = np.abs(M[:r] - M[r]).max(axis=1)
        flags.append(bool(diff.size and diff.min() <= DUPLICATE_TOL))
    return tuple(flags)


def _call_rng(seed, iteration, slot):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(iteration), int(slot)]))


def train_fixed(game, opponent: Agent, init: Agent, oracle: Oracle, T, seed=0) -> Agent:
    """Run ``T`` oracle calls against the fixed objective ``phi(., opponent)``."""
    obj = mixture_objective(Population(game.game_id, (opponent,)), [1.0], False, game)
    v = init
    for t in range(T):
        v = oracle(v, obj, _call_rng(seed, t, 0), tag=init.tag).agent
    return v


def self_play(game, init: Agent, oracle: Oracle, T, seed=0) -> Population:
    """Iterates ``v_{t+1} = oracle(v_t, phi(., v_t))`` collected as a population."""
    agents = [init]
    v = init
    for t in range(T):
        obj = mixture_objective(Population(game.game_id, (v,)), [1.0], False, game)
        v = oracle(v, obj, _call_rng(seed, t, 0), tag=f"sp{t + 1}").agent
        agents.append(v)
    return Population(game.game_id, tuple(agents), {"algorithm": "self_play", "seed": str(seed)})


def _single_response(state, oracle, weights, seed, tag, parent=None):
    parent = state.population[-1] if parent is None else parent
    obj = mixture_objective(state.population, weights, False, state.game)
    res = oracle(parent, obj, _call_rng(seed, state.iteration, 0), tag=tag)
    new = _append(state, [res.agent], res.queries)
    report = StepReport((len(state.population) - 1,), (res.improved,), res.queries,
                        _duplicate_flags(new.eval, len(state.population)))
    return new, report


def psro_step_self_play(state: PsroState, oracle: Oracle, seed=0):
    """Train the newest agent against itself (self-play as a population step)."""
    n = len(state.population)
    w = np.zeros(n)
    w[-1] = 1.0
    return _single_response(state, oracle, w, seed, f"sp{state.iteration + 1}")


def psro_step_nash(state: PsroState, oracle: Oracle, seed=0):
    """Train the newest agent against the Nash mixture and append it."""
    return _single_response(state, oracle, state.nash.probs, seed, f"n{state.iteration + 1}")


def psro_step_uniform(state: PsroState, oracle: Oracle, seed=0):
    n = len(state.population)
    return _single_response(state, oracle, np.full(n, 1.0 / n), seed, f"u{state.iteration + 1}")


def rectified_targets(nash: NashMixture, threshold=SUPPORT_THRESHOLD, A=None):
    """Indices of the agents with Nash mass above ``threshold``.

    Given the evaluation matrix ``A``, identical agents (equal rows) count
    once: each supported class is represented by its earliest member.
    """
    supported = np.flatnonzero(nash.probs > threshold)
    if A is None:
        return supported
    first, inverse, _ = duplicate_classes(A)
    return np.unique(first[inverse[supported]])


def psro_step_rectified(state: PsroState, oracle: Oracle, seed=0, threshold=SUPPORT_THRESHOLD,
                        split_budget=True, dedupe=True):
    """Train an updated copy of every Nash-supported agent against the Nash
    mixture of the agents it beats, ``sum_i p_i max(phi(., w_i), 0)``.

    With ``split_budget`` the single-call query allowance of the oracle is
    shared among the trained agents, so one step costs about as much as one
    step of the other trainers.  With ``dedupe`` identical supported agents
    are trained once; otherwise a game with few distinct strategies (Blotto)
    doubles its population every step.
    """
    p = state.nash.probs
    targets = rectified_targets(state.nash, threshold, state.eval.entries if dedupe else None)
    obj = mixture_objective(state.population, p, True, state.game)
    steps = None
    if split_budget:
        allowance = oracle.queries_for(oracle.step_count) // len(targets)
        steps = oracle.steps_for(allowance)
    results = [oracle(state.population[j], obj, _call_rng(seed, state.iteration, j), steps=steps,
                      tag=f"r{state.iteration + 1}.{j}") for j in targets]
    queries = sum(r.queries for r in results)
    new = _append(state, [r.agent for r in results], queries)
    report = StepReport(tuple(int(j) for j in targets), tuple(r.improved for r in results),
                        queries, _duplicate_flags(new.eval, len(state.population)))
    return new, report


STEPS = {"self_play": psro_step_self_play, "psro_n": psro_step_nash,
         "psro_u": psro_step_uniform, "psro_rn": psro_step_rectified}


# -- run log ----------------------------------------------------------------------------

@dataclass
class IterationRecord:
    iteration: int
    population_size: int
    nash: list
    diversity: float
    hull_area: float
    queries: int
    trained: list = field(default_factory=list)
    improved: list = field(default_factory=list)
    redundant: list = field(default_factory=list)
    perf_vs_initial: float = 0.0
    converged: bool = False

    @property
    def snapshot(self):
        return f"population[:{self.population_size}]"

    def to_dict(self):
        d = asdict(self)
        d["snapshot"] = self.snapshot
        return d


@dataclass
class PsroRunLog:
    algorithm: str = ""
    game_id: str = ""
    seed: int = 0
    records: list = field(default_factory=list)
    converged_at: int | None = None

    def append(self, rec: IterationRecord):
        if self.records and rec.iteration <= self.records[-1].iteration:
            raise ValueError("run log iterations must be strictly increasing")
        self.records.append(rec)

    def column(self, name):
        return [getattr(r, name) for r in self.records]

    def to_jsonl(self) -> str:
        head = {"algorithm": self.algorithm, "game_id": self.game_id, "seed": self.seed,
                "converged_at": self.converged_at}
        lines = [json.dumps({"header": head}, sort_keys=True)]
        lines += [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text):
        out = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            if "header" in d:
                h = d["header"]
                out.algorithm, out.game_id = h["algorithm"], h["game_id"]
                out.seed, out.converged_at = h["seed"], h["converged_at"]
                continue
            d.pop("snapshot", None)
            out.append(IterationRecord(**d))
        return out

    def metrics_csv(self) -> str:
        rows = ["iteration,diversity,hull_area,queries"]
        for r in self.records:
            rows.append(f"{r.iteration},{r.diversity:.17g},{r.hull_area:.17g},{r.queries}")
        return "\n".join(rows) + "\n"


def _hull(A):
    if A.n < 2:
        return 0.0
    return schur_embedding(A.entries, 2).hull_area()


def _record(state: PsroState, n_initial, report: StepReport | None, converged=False):
    A = state.eval.entries
    perf = solve_zero_sum(A[:, :n_initial]).value
    return IterationRecord(
        iteration=state.iteration, population_size=len(state.population),
        nash=[float(x) for x in state.nash.probs],
        diversity=effective_diversity(A, state.nash), hull_area=_hull(state.eval),
        queries=int(state.queries),
        trained=list(report.trained) if report else [],
        improved=[bool(x) for x in report.improved] if report else [],
        redundant=list(report.redundant) if report else [],
        perf_vs_initial=float(perf), converged=converged)


def train(game, population: Population, algorithm, oracle: Oracle, iterations, seed=0,
          eval_cfg: EvalConfig | None = None, threshold=SUPPORT_THRESHOLD, split_budget=True,
          dedupe=True, query_budget=None, callback=None):
    """Run ``iterations`` steps of ``algorithm``; returns ``(state, run_log)``.

    Stops early once a step's oracle calls all fail the improvement test, or
    before a step once ``query_budget`` oracle queries have been spent.
    ``callback(state, record)`` is invoked after every logged iteration.
    """
    if algorithm not in STEPS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    state = init_state(game, population, eval_cfg)
    n0 = len(population)
    run_log = PsroRunLog(algorithm, game.game_id, int(seed))
    rec = _record(state, n0, None)
    run_log.append(rec)
    if callback:
        callback(state, rec)
    step = STEPS[algorithm]
    for t in range(iterations):
        if query_budget is not None and state.queries >= query_budget:
            log.info("%s spent its query budget after %d iterations", algorithm, t)
            break
        try:
            if algorithm == "psro_rn":
                state, report = step(state, oracle, seed, threshold, split_budget, dedupe)
            else:
                state, report = step(state, oracle, seed)
        except Exception as exc:
            raise PsroError(f"iteration {t + 1} failed: {exc}", t + 1, run_log) from exc
        rec = _record(state, n0, report, report.converged)
        run_log.append(rec)
        if callback:
            callback(state, rec)
        if report.converged:
            run_log.converged_at = state.iteration
            log.info("%s converged at iteration %d", algorithm, state.iteration)
            break
    return state, run_log


class PSRO(BaseEstimator):
    """Population training as an estimator.

    ``fit(X)`` trains from the initial population ``X`` (one random agent when
    omitted).  ``score(P)`` is the relative performance of the trained
    population against ``P``.
    """

    def __init__(self, game=None, algorithm="psro_rn", oracle="gradient", iterations=20,
                 step_count=50, step_size=0.1, epsilon=1e-6, split_budget=True,
                 dedupe=True, support_threshold=SUPPORT_THRESHOLD, eval_samples=1,
                 random_state=0):
        self.game = game
        self.algorithm = algorithm
        self.oracle = oracle
        self.iterations = iterations
        self.step_count = step_count
        self.step_size = step_size
        self.epsilon = epsilon
        self.split_budget = split_budget
        self.dedupe = dedupe
        self.support_threshold = support_threshold
        self.eval_samples = eval_samples
        self.random_state = random_state

    def _oracle(self):
        if isinstance(self.oracle, Oracle):
            return self.oracle
        return Oracle(self.oracle, self.step_count, self.step_size, self.epsilon)

    def fit(self, X=None, y=None):
        if self.game is None:
            raise ValueError("PSRO needs a game")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        seed = int(self.random_state)
        if X is None:
            X = initial_population(self.game, seed)
        elif not isinstance(X, Population):
            X = Population.from_params(self.game.game_id, np.atleast_2d(X))
        state, run_log = train(self.game, X, self.algorithm, self._oracle(), self.iterations,
                               seed, EvalConfig(self.eval_samples, seed),
                               self.support_threshold, self.split_budget, self.dedupe)
        self.population_ = replace(state.population, meta={
            "algorithm": self.algorithm, "seed": str(seed), "iteration": str(state.iteration)})
        self.eval_matrix_ = state.eval
        self.nash_ = state.nash
        self.log_ = run_log
        self.queries_ = state.queries
        self.converged_ = run_log.converged_at is not None
        return self

    def score(self, X, y=None):
        return relative_performance(self.population_, X, self.game).value


def initial_population(game, seed, size=1) -> Population:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2**31 - 1]))
    agents = tuple(game.random_agent(rng, tag=f"init{i}") for i in range(size))
    return Population(game.game_id, agents, {"seed": str(seed)})
