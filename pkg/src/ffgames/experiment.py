"""Run configurations and multi-algorithm comparisons at equal query budget."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .artifacts import read_population, write_population, write_run_log
from .core import EvalConfig, Population, matrix_to_csv
from .games import blotto_game, lotto_game, make_game, sample_customers, save_customers
from .metrics import relative_performance
from .oracles import Oracle
from .psro import ALGORITHMS, SUPPORT_THRESHOLD, initial_population, train


class ConfigError(ValueError):
    pass


CONFIG_KEYS = {"game", "algorithm", "algorithms", "oracle", "iterations", "seed", "seeds",
               "eval", "init", "support_threshold", "dedupe"}
ORACLE_KEYS = {"kind", "step_count", "step_size", "epsilon", "offspring", "sigma0", "patience",
               "query_budget", "split_budget"}


@dataclass
class RunConfig:
    game: dict
    algorithm: str
    oracle: dict
    iterations: int
    seed: int
    eval: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)
    support_threshold: float = SUPPORT_THRESHOLD
    dedupe: bool = True
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d, base_dir=".", seed=None, algorithm=None):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "game" not in d:
            raise ConfigError("config needs a 'game'")
        seed = d.get("seed") if seed is None else seed
        if seed is None:
            raise ConfigError("config needs a 'seed'")
        algorithm = algorithm or d.get("algorithm", "psro_rn")
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
        oracle = dict(d.get("oracle", {}))
        bad = set(oracle) - ORACLE_KEYS
        if bad:
            raise ConfigError(f"unknown oracle keys: {sorted(bad)}")
        game = d["game"]
        if isinstance(game, str):
            game = {"id": game}
        if not isinstance(game, dict):
            raise ConfigError("'game' must be a game id or an object")
        try:
            iterations = int(d.get("iterations", 20))
            seed = int(seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad number in config: {exc}") from exc
        if iterations < 0:
            raise ConfigError("iterations must be >= 0")
        return cls(game, algorithm, oracle, iterations, seed, dict(d.get("eval", {})),
                   dict(d.get("init", {})), float(d.get("support_threshold", SUPPORT_THRESHOLD)),
                   bool(d.get("dedupe", True)), str(base_dir))

    @classmethod
    def load(cls, path, **overrides):
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent, **overrides)

    def make_oracle(self) -> Oracle:
        kw = {k: v for k, v in self.oracle.items() if k not in ("query_budget", "split_budget")}
        try:
            return Oracle(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad oracle settings: {exc}") from exc

    def query_budget(self, oracle: Oracle):
        """Total oracle queries allowed for one run.

        Defaults to the cost of ``iterations`` single-agent oracle calls, so
        every algorithm run from one config gets the same budget.
        """
        budget = self.oracle.get("query_budget")
        if budget is None:
            return self.iterations * oracle.queries_for(oracle.step_count)
        return int(budget)

    def eval_config(self) -> EvalConfig:
        return EvalConfig(int(self.eval.get("samples", 1)), int(self.eval.get("seed", self.seed)))


def build_game(spec: dict, base_dir=".", out_dir=None):
    """Resolve a game spec; Lotto customers are written next to the artifacts.

    The customer file is named after a digest of its contents, so equal game
    ids always mean equal customer sets.
    """
    spec = dict(spec)
    name = spec.pop("name", None)
    game_id = spec.pop("id", None)
    try:
        if game_id is not None and name is None:
            game = make_game(game_id, base_dir=base_dir)
            customers = getattr(game.info.get("config"), "customers", None)
            if customers is None:
                return game
            k = game.info["config"].servers_per_agent
        elif name == "blotto":
            return blotto_game(int(spec.get("areas", 3)), int(spec.get("coins", 10)))
        elif name == "lotto":
            k = int(spec.get("k", 4))
            if "customer_file" in spec:
                customers = np.loadtxt(Path(base_dir) / spec["customer_file"], delimiter=",",
                                       ndmin=2)
            else:
                customers = sample_customers(int(spec.get("customers", 9)),
                                             int(spec.get("customer_seed", 0)))
        else:
            raise ConfigError(f"game spec needs an 'id' or a known 'name', got {name!r}")
    except (OSError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    customers = np.asarray(customers, dtype=float)
    fname = f"customers-{hashlib.sha1(customers.tobytes()).hexdigest()[:12]}.csv"
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        save_customers(customers, Path(out_dir) / fname)
    return lotto_game(customers, k, customer_file=fname)


def build_initial_population(cfg: RunConfig, game) -> Population:
    init = cfg.init
    if "population" in init:
        pop = read_population(Path(cfg.base_dir) / init["population"])
        if pop.game_id != game.game_id:
            raise ConfigError(f"initial population plays {pop.game_id!r}, not {game.game_id!r}")
        return pop
    if "params" in init:
        params = [game.project(np.asarray(p, dtype=float)) if game.project else p
                  for p in init["params"]]
        return Population.from_params(game.game_id, params,
                                      [f"init{i}" for i in range(len(params))])
    size = int(init.get("size", 1))
    if size < 1:
        raise ConfigError("init size must be >= 1")
    return initial_population(game, cfg.seed, size)


def run(cfg: RunConfig, out_dir=None, game=None, init=None, eval_snapshots=True):
    """Train one algorithm; with ``out_dir`` write the run artifacts there.

    Artifacts: ``run_log.jsonl``, ``population.json``, ``metrics.csv`` and
    ``eval/iter_XXXX.csv`` (the evaluation matrix after every iteration).
    """
    game = game or build_game(cfg.game, cfg.base_dir, out_dir)
    init = init or build_initial_population(cfg, game)
    oracle = cfg.make_oracle()
    out = None if out_dir is None else Path(out_dir)
    callback = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if eval_snapshots:
            (out / "eval").mkdir(exist_ok=True)

            def callback(state, rec):
                (out / "eval" / f"iter_{rec.iteration:04d}.csv").write_text(
                    matrix_to_csv(state.eval.entries), encoding="utf-8")

    state, run_log = train(game, init, cfg.algorithm, oracle, cfg.iterations, cfg.seed,
                           cfg.eval_config(), cfg.support_threshold,
                           bool(cfg.oracle.get("split_budget", True)), cfg.dedupe,
                           cfg.query_budget(oracle), callback)
    pop = replace(state.population, meta={"algorithm": cfg.algorithm, "seed": str(cfg.seed),
                                          "iteration": str(state.iteration)})
    if out is not None:
        write_run_log(run_log, out / "run_log.jsonl")
        write_population(pop, out / "population.json")
        (out / "metrics.csv").write_text(run_log.metrics_csv(), encoding="utf-8")
    return pop, state, run_log


@dataclass
class Comparison:
    """Populations trained from one initial population, and ``perf(reference, other)``."""

    seed: int
    reference: str
    populations: dict
    logs: dict
    perf: dict

    def hull_nondecreasing(self, algorithm=None, tol=1e-12):
        hull = self.logs[algorithm or self.reference].column("hull_area")
        return all(b >= a - tol for a, b in zip(hull, hull[1:]))


def compare_algorithms(cfg: RunConfig, algorithms=ALGORITHMS, reference="psro_rn",
                       out_dir=None) -> Comparison:
    """Run every algorithm from the same initial population and budget.

    ``perf`` holds ``perf(reference, a)`` for every other algorithm ``a``, plus
    ``"self_play_final"`` against only the last self-play agent.
    """
    game = build_game(cfg.game, cfg.base_dir, out_dir)
    init = build_initial_population(cfg, game)
    pops, logs = {}, {}
    for alg in dict.fromkeys([reference, *algorithms]):
        sub = None if out_dir is None else Path(out_dir) / alg
        pop, _, run_log = run(replace(cfg, algorithm=alg), sub, game, init,
                              eval_snapshots=False)
        pops[alg], logs[alg] = pop, run_log
    perf = {}
    for alg in algorithms:
        if alg != reference:
            perf[alg] = relative_performance(pops[reference], pops[alg], game).value
    if "self_play" in pops:
        final = Population(game.game_id, (pops["self_play"][-1],))
        perf["self_play_final"] = relative_performance(pops[reference], final, game).value
    result = Comparison(cfg.seed, reference, pops, logs, perf)
    if out_dir is not None:
        report = {"seed": cfg.seed, "reference": reference, "perf": perf,
                  "queries": {a: logs[a].records[-1].queries for a in logs},
                  "hull_nondecreasing": result.hull_nondecreasing()}
        (Path(out_dir) / "comparison.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return result
