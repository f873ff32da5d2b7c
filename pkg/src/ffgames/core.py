"""Agents, populations and antisymmetric evaluation matrices."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .validation import antisymmetry_defect, check_square


def _frozen_params(params):
    arr = np.array(params, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Agent:
    """A parameter vector tagged with the game it plays."""

    game_id: str
    params: np.ndarray
    tag: str = ""

    def __post_init__(self):
        params = _frozen_params(self.params)
        if not np.all(np.isfinite(params)):
            raise ValueError(f"agent {self.tag!r} has non-finite parameters")
        object.__setattr__(self, "params", params)

    def __eq__(self, other):
        if not isinstance(other, Agent):
            return NotImplemented
        return (self.game_id == other.game_id and self.tag == other.tag
                and np.array_equal(self.params, other.params))

    def __hash__(self):
        return hash((self.game_id, self.tag, self.params.tobytes()))

    def with_params(self, params, tag=None):
        return Agent(self.game_id, params, self.tag if tag is None else tag)


@dataclass(frozen=True)
class Population:
    """An ordered, non-empty list of agents playing the same game."""

    game_id: str
    agents: tuple
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        agents = tuple(self.agents)
        if not agents:
            raise ValueError("population must be non-empty")
        for a in agents:
            if a.game_id != self.game_id:
                raise ValueError(
                    f"agent {a.tag!r} plays {a.game_id!r}, population plays {self.game_id!r}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "meta", {str(k): str(v) for k, v in dict(self.meta).items()})

    @classmethod
    def from_params(cls, game_id, params: Iterable, tags=None, meta=None):
        params = [np.asarray(p, dtype=float) for p in params]
        if tags is None:
            tags = [f"a{i}" for i in range(len(params))]
        return cls(game_id, tuple(Agent(game_id, p, t) for p, t in zip(params, tags)),
                   meta or {})

    def __len__(self):
        return len(self.agents)

    def __iter__(self):
        return iter(self.agents)

    def __getitem__(self, i):
        return self.agents[i]

    @property
    def params(self):
        """Agent parameters stacked into an ``(n, param_dim)`` array."""
        return np.stack([a.params for a in self.agents])

    def extend(self, agents: Sequence[Agent], **meta):
        merged = dict(self.meta)
        merged.update(meta)
        return Population(self.game_id, self.agents + tuple(agents), merged)

    def subset(self, indices):
        return Population(self.game_id, tuple(self.agents[i] for i in indices), self.meta)


@dataclass(frozen=True, eq=False)
class EvalMatrix:
    """Dense antisymmetric payoff matrix with its antisymmetry tolerance."""

    entries: np.ndarray
    tol: float = 0.0

    def __post_init__(self):
        A = check_square(self.entries, "evaluation matrix").copy()
        A.setflags(write=False)
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        defect = antisymmetry_defect(A)
        if defect > self.tol:
            raise ValueError(f"matrix violates antisymmetry: {defect:.3e} > tol {self.tol:.3e}")
        object.__setattr__(self, "entries", A)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __len__(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def shape(self):
        return self.entries.shape

    def __eq__(self, other):
        if not isinstance(other, EvalMatrix):
            return NotImplemented
        return self.tol == other.tol and np.array_equal(self.entries, other.entries)

    def to_csv(self, path=None):
        text = matrix_to_csv(self.entries)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source, tol=0.0):
        return cls(read_matrix_csv(source), tol=tol)


@dataclass(frozen=True)
class EvalConfig:
    """How payoffs are estimated: match samples per pair and the base seed.

    Deterministic games ignore both; ``samples`` only matters when the game
    declares itself stochastic.
    """

    samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


def antisymmetrize(M) -> EvalMatrix:
    """Return ``(M - M.T) / 2`` as an exactly antisymmetric matrix."""
    M = check_square(M)
    return EvalMatrix((M - M.T) / 2.0, tol=0.0)


def _pair_payoff(game, v, w, cfg: EvalConfig, i, j):
    if not getattr(game, "stochastic", False):
        value = float(game.phi(v.params, w.params, None))
    else:
        total = 0.0
        for s in range(cfg.samples):
            seed = np.random.SeedSequence([cfg.seed, i, j, s]).generate_state(1)[0]
            total += float(game.phi(v.params, w.params, int(seed)))
        value = total / cfg.samples
    if not np.isfinite(value):
        raise ValueError(f"non-finite payoff between agents {v.tag!r} and {w.tag!r}")
    return value


def _check_population(game, pop: Population):
    if pop.game_id != game.game_id:
        raise ValueError(f"population plays {pop.game_id!r}, not {game.game_id!r}")
    for a in pop:
        if a.params.shape[0] != game.param_dim:
            raise ValueError(
                f"agent {a.tag!r} has {a.params.shape[0]} params, "
                f"{game.game_id!r} expects {game.param_dim}")


def build_eval_matrix(game, pop: Population, eval_cfg: EvalConfig | None = None) -> EvalMatrix:
    """Evaluate every pair ``i < j`` once and reflect with a sign flip."""
    eval_cfg = eval_cfg or EvalConfig()
    _check_population(game, pop)
    n = len(pop)
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = _pair_payoff(game, pop[i], pop[j], eval_cfg, i, j)
            A[j, i] = -A[i, j]
    return EvalMatrix(A, tol=0.0)


def extend_eval_matrix(game, A: EvalMatrix, pop: Population,
                       eval_cfg: EvalConfig | None = None) -> EvalMatrix:
    """Grow ``A`` (built on a prefix of ``pop``) to cover all of ``pop``.

    Only the new rows are evaluated; existing entries are copied verbatim.
    """
    eval_cfg = eval_cfg or EvalConfig()
    _check_population(game, pop)
    m, n = A.n, len(pop)
    if m > n:
        raise ValueError("population is smaller than the existing matrix")
    B = np.zeros((n, n))
    B[:m, :m] = A.entries
    for j in range(m, n):
        for i in range(j):
            B[i, j] = _pair_payoff(game, pop[i], pop[j], eval_cfg, i, j)
            B[j, i] = -B[i, j]
    return EvalMatrix(B, tol=0.0)


def cross_matrix(game, P: Population, Q: Population,
                 eval_cfg: EvalConfig | None = None) -> np.ndarray:
    """Rectangular payoffs ``phi(v, w)`` for ``v`` in ``P`` and ``w`` in ``Q``."""
    eval_cfg = eval_cfg or EvalConfig()
    _check_population(game, P)
    _check_population(game, Q)
    M = np.empty((len(P), len(Q)))
    for i, v in enumerate(P):
        for j, w in enumerate(Q):
            M[i, j] = _pair_payoff(game, v, w, eval_cfg, i, j)
    return M


def matrix_to_csv(M) -> str:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    lines = [",".join(format(float(x), ".17g") for x in row) for row in M]
    return "\n".join(lines) + "\n"


def read_matrix_csv(source) -> np.ndarray:
    """Parse a CSV matrix from a path, file object or string buffer."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        return np.zeros((0, 0))
    data = np.loadtxt(io.StringIO("\n".join(rows)), delimiter=",", ndmin=2)
    return data.astype(float)
