"""Concrete functional-form games.

A game is an antisymmetric payoff ``phi(v, w)`` on parameter vectors.  Every
game here is deterministic; the ``seed`` argument exists so that stochastic
user-defined games plug into the same evaluation machinery.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Agent, EvalMatrix, Population


@dataclass(frozen=True)
class GameDefinition:
    """A symmetric zero-sum game on real parameter vectors.

    Parameters
    ----------
    game_id : str
        Registry identifier, e.g. ``"blotto:3:10"``.
    param_dim : int
        Length of every agent's parameter vector.
    phi : callable
        ``phi(v, w, seed) -> float`` with ``phi(v, w) == -phi(w, v)``.
    grad : callable, optional
        ``grad(v, w) -> ndarray``, the gradient of ``phi(v, w)`` in ``v``.
    project : callable, optional
        Map applied to parameters after each oracle step (feasibility).
    sampler : callable, optional
        ``sampler(rng) -> ndarray`` drawing a random initial agent.
    """

    game_id: str
    param_dim: int
    phi: Callable
    grad: Optional[Callable] = None
    project: Optional[Callable] = None
    sampler: Optional[Callable] = None
    stochastic: bool = False
    info: dict = field(default_factory=dict, compare=False)

    def payoff(self, v: Agent, w: Agent, seed=None) -> float:
        return float(self.phi(v.params, w.params, seed))

    def agent(self, params, tag="") -> Agent:
        params = np.asarray(params, dtype=float).reshape(-1)
        if params.shape[0] != self.param_dim:
            raise ValueError(f"{self.game_id} expects {self.param_dim} params, got {params.shape[0]}")
        return Agent(self.game_id, params, tag)

    def random_agent(self, rng, tag="init") -> Agent:
        if self.sampler is None:
            params = rng.normal(size=self.param_dim)
        else:
            params = self.sampler(rng)
        if self.project is not None:
            params = self.project(params)
        return self.agent(params, tag)


# -- disc and symplectic games ------------------------------------------------

def disc_phi(v, w, seed=None) -> float:
    return float(v[0] * w[1] - v[1] * w[0])


def _disc_grad(v, w):
    return np.array([w[1], -w[0]], dtype=float)


def _ball_projection(radius):
    def project(x):
        norm = np.linalg.norm(x)
        return x if norm <= radius else x * (radius / norm)
    return project


def disc_game(radius=None) -> GameDefinition:
    """Disc game ``v1*w2 - v2*w1``; optionally restricted to a ball."""
    project = None if radius is None else _ball_projection(radius)
    game_id = "disc" if radius is None else f"disc:{radius:g}"
    return GameDefinition(game_id, 2, disc_phi, _disc_grad, project,
                          sampler=lambda rng: rng.normal(scale=0.5, size=2))


def rps_embedding(eps, game_id="disc") -> Population:
    """Rock, paper and scissors as disc-game agents whose payoffs are +-eps**2."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    # r**2 * sin(2*pi/3) = eps**2 gives payoffs of exactly +-eps**2.
    radius = eps * np.sqrt(2.0 / np.sqrt(3.0))
    angles = np.array([0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0])
    pts = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return Population.from_params(game_id, pts, tags=["rock", "paper", "scissors"],
                                  meta={"construction": f"rps_embedding(eps={eps!r})"})


def _omega_apply(w):
    # Block-wise rotation generator, oriented so each block is a disc game.
    out = np.empty_like(w, dtype=float)
    out[0::2] = w[1::2]
    out[1::2] = -w[0::2]
    return out


def symplectic_phi(v, w, seed=None) -> float:
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.shape[0] % 2:
        raise ValueError("symplectic game needs equal, even-dimensional vectors")
    return float(v @ _omega_apply(w))


def symplectic_game(d) -> GameDefinition:
    if d < 1:
        raise ValueError("d must be >= 1")
    return GameDefinition(f"symplectic:{d}", 2 * d, symplectic_phi,
                          lambda v, w: _omega_apply(np.asarray(w, dtype=float)),
                          sampler=lambda rng: rng.normal(scale=0.5, size=2 * d))


def deformed_symplectic_game(maps, odd_fns, param_dim, game_id="deformed") -> GameDefinition:
    """``phi(v, w) = sum_i g_i(f_i(v) @ Omega @ f_i(w))`` for odd ``g_i``.

    ``maps`` are callables from R^param_dim into an even-dimensional space.
    Gradients fall back to finite differences.
    """
    maps = tuple(maps)
    odd_fns = tuple(odd_fns)
    if len(maps) != len(odd_fns) or not maps:
        raise ValueError("need one odd function per map")
    probe = np.linspace(-2.0, 2.0, 9)
    for g in odd_fns:
        if not np.allclose([g(-x) for x in probe], [-g(x) for x in probe], atol=1e-12):
            raise ValueError("deformation functions must be odd")

    def phi(v, w, seed=None):
        return float(sum(g(symplectic_phi(f(v), f(w))) for f, g in zip(maps, odd_fns)))

    return GameDefinition(game_id, param_dim, phi)


# -- transitive and monotonic games ----------------------------------------------

def transitive_game(rating=None, rating_grad=None, param_dim=1, game_id="transitive"):
    """``phi(v, w) = f(v) - f(w)``; the default rating is the sole parameter."""
    if rating is None:
        def rating(x):
            return float(x[0])

        def rating_grad(x):
            return np.ones(1)

    def phi(v, w, seed=None):
        return float(rating(v) - rating(w))

    grad = None if rating_grad is None else (lambda v, w: np.asarray(rating_grad(v), dtype=float))
    return GameDefinition(game_id, param_dim, phi, grad, info={"rating": rating})


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def elo_game(ratings, alpha=1.0) -> EvalMatrix:
    """Evaluation matrix of Elo win probabilities, centred at zero."""
    f = np.asarray(ratings, dtype=float)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    diff = f[:, None] - f[None, :]
    upper = np.triu(_sigmoid(alpha * diff) - 0.5, 1)
    return EvalMatrix(upper - upper.T, tol=0.0)


def elo_functional_game(alpha=1.0) -> GameDefinition:
    """Elo game on one-dimensional agents whose parameter is the rating."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def phi(v, w, seed=None):
        return float(_sigmoid(alpha * (v[0] - w[0])) - 0.5)

    def grad(v, w):
        s = _sigmoid(alpha * (v[0] - w[0]))
        return np.array([alpha * s * (1.0 - s)])

    game_id = "elo" if alpha == 1.0 else f"elo:{alpha:g}"
    return GameDefinition(game_id, 1, phi, grad)


def win_probability_game(prob, param_dim, game_id) -> GameDefinition:
    """Wrap ``prob(v, w, seed) = P(v beats w)`` as ``phi = P - 1/2``."""
    def phi(v, w, seed=None):
        return float(prob(v, w, seed)) - 0.5

    return GameDefinition(game_id, param_dim, phi, stochastic=True)


def long_cycle_matrix(n) -> EvalMatrix:
    """Agent ``i`` beats agent ``i+1`` (mod n) and nothing else is decided."""
    if n < 3:
        raise ValueError("a long cycle needs n >= 3")
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = 1.0
        A[(i + 1) % n, i] = -1.0
    return EvalMatrix(A, tol=0.0)


# -- Colonel Blotto ---------------------------------------------------------------

@dataclass(frozen=True)
class BlottoConfig:
    areas: int = 3
    coins: int = 10

    def __post_init__(self):
        if self.areas < 1 or self.coins < 1:
            raise ValueError("Blotto needs at least one area and one coin")


def _softmax(x):
    z = np.exp(x - np.max(x))
    return z / z.sum()


def blotto_discretize(logits, coins) -> np.ndarray:
    """Largest-remainder rounding of ``softmax(logits) * coins``.

    Ties in the fractional parts go to the lowest index; fractional parts are
    compared at 12 decimals so that rounding noise cannot break a tie.
    """
    logits = np.asarray(logits, dtype=float)
    if coins < 0:
        raise ValueError("coins must be nonnegative")
    share = _softmax(logits) * coins
    base = np.floor(share)
    frac = np.round(share - base, 12)
    base = base + (frac >= 1.0)
    frac = np.where(frac >= 1.0, 0.0, frac)
    alloc = base.astype(int)
    left = coins - int(alloc.sum())
    if left > 0:
        order = np.lexsort((np.arange(frac.size), -frac))
        alloc[order[:left]] += 1
    elif left < 0:
        order = np.lexsort((np.arange(frac.size), frac))
        for i in order:
            if left == 0:
                break
            if alloc[i] > 0:
                alloc[i] -= 1
                left += 1
    return alloc


def blotto_allocation_payoff(x, y) -> float:
    """Areas won minus areas lost, divided by the number of areas."""
    x = np.asarray(x)
    y = np.asarray(y)
    return float(np.sign(x - y).sum() / x.size)


def blotto_phi(v, w, cfg: BlottoConfig = BlottoConfig()) -> float:
    v = v.params if isinstance(v, Agent) else v
    w = w.params if isinstance(w, Agent) else w
    if len(v) != cfg.areas or len(w) != cfg.areas:
        raise ValueError(f"Blotto agents need {cfg.areas} logits")
    return blotto_allocation_payoff(blotto_discretize(v, cfg.coins),
                                    blotto_discretize(w, cfg.coins))


def blotto_game(areas=3, coins=10) -> GameDefinition:
    cfg = BlottoConfig(areas, coins)

    def phi(v, w, seed=None):
        return blotto_phi(v, w, cfg)

    return GameDefinition(f"blotto:{areas}:{coins}", areas, phi,
                          sampler=lambda rng: rng.normal(size=areas),
                          info={"config": cfg})


# -- Differentiable Lotto -----------------------------------------------------------

@dataclass(frozen=True)
class LottoConfig:
    customers: np.ndarray
    servers_per_agent: int = 4

    def __post_init__(self):
        c = np.array(self.customers, dtype=float).reshape(-1, 2)
        if c.shape[0] == 0:
            raise ValueError("Lotto needs at least one customer")
        if self.servers_per_agent < 1:
            raise ValueError("servers_per_agent must be >= 1")
        c.setflags(write=False)
        object.__setattr__(self, "customers", c)


@dataclass(frozen=True)
class LottoAgentView:
    masses: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        x = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if m.shape[0] != x.shape[0]:
            raise ValueError("one mass per server is required")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-12:
            raise ValueError("masses must form a probability vector")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "positions", x)

    @property
    def k(self):
        return self.masses.shape[0]


def lotto_view(params, k) -> LottoAgentView:
    """Split ``params = (k mass logits, 2k coordinates)`` into an agent view."""
    params = np.asarray(params, dtype=float)
    return LottoAgentView(_softmax(params[:k]), params[k:].reshape(k, 2))


def lotto_params(view: LottoAgentView) -> np.ndarray:
    if np.any(view.masses <= 0):
        raise ValueError("zero masses have no logit parametrization")
    logits = np.log(view.masses)
    return np.concatenate([logits - logits.mean(), view.positions.reshape(-1)])


def _lotto_assignment(cust, pos_a, pos_b):
    d_a = -((cust[:, None, :] - pos_a[None, :, :]) ** 2).sum(-1)
    d_b = -((cust[:, None, :] - pos_b[None, :, :]) ** 2).sum(-1)
    s = np.concatenate([d_a, d_b], axis=1)
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    u = e / e.sum(axis=1, keepdims=True)
    k = pos_a.shape[0]
    return u[:, :k], u[:, k:]


def lotto_phi(a: LottoAgentView, b: LottoAgentView, cfg: LottoConfig) -> float:
    """Soft customer assignment payoff; one joint softmax over both agents' servers."""
    if a.k != b.k:
        raise ValueError("both agents need the same number of servers")
    va, wb = _lotto_assignment(cfg.customers, a.positions, b.positions)
    return float((va @ a.masses).sum() - (wb @ b.masses).sum())


def lotto_grad(params_a, params_b, cfg: LottoConfig) -> np.ndarray:
    """Gradient of the Lotto payoff in the first agent's raw parameters."""
    k = cfg.servers_per_agent
    a = lotto_view(params_a, k)
    b = lotto_view(params_b, k)
    cust = cfg.customers
    va, wb = _lotto_assignment(cust, a.positions, b.positions)
    per_customer = va @ a.masses - wb @ b.masses
    g_mass = va.sum(axis=0)
    g_logits = a.masses * (g_mass - a.masses @ g_mass)
    # d phi / d score_ij for a's servers, then chain through -|c_i - x_j|^2.
    coef = va * (a.masses[None, :] - per_customer[:, None])
    diff = cust[:, None, :] - a.positions[None, :, :]
    g_pos = 2.0 * (coef[:, :, None] * diff).sum(axis=0)
    return np.concatenate([g_logits, g_pos.reshape(-1)])


def lotto_width(view: LottoAgentView) -> float:
    center = view.masses @ view.positions
    return float(view.masses @ np.linalg.norm(view.positions - center, axis=1))


def lotto_project_width(view: LottoAgentView) -> LottoAgentView:
    """Rescale positions about the barycenter so that the width is one."""
    width = lotto_width(view)
    if width <= 1e-12:
        raise ValueError("degenerate Lotto agent: all servers coincide")
    center = view.masses @ view.positions
    return LottoAgentView(view.masses, center + (view.positions - center) / width)


def sample_customers(c, seed) -> np.ndarray:
    if c < 1:
        raise ValueError("need at least one customer")
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(c, 2))


def save_customers(customers, path):
    customers = np.asarray(customers, dtype=float).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in customers:
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def load_customers(path) -> np.ndarray:
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    if pts.shape[1] != 2:
        raise ValueError("customer file needs two columns")
    return pts


def lotto_game(customers, k=4, customer_file=None) -> GameDefinition:
    cfg = LottoConfig(customers, k)
    if customer_file is None:
        digest = hashlib.sha1(cfg.customers.tobytes()).hexdigest()[:12]
        game_id = f"lotto:{k}:inline-{digest}"
    else:
        game_id = f"lotto:{k}:{customer_file}"

    def phi(v, w, seed=None):
        return lotto_phi(lotto_view(v, k), lotto_view(w, k), cfg)

    def grad(v, w):
        return lotto_grad(v, w, cfg)

    def project(params):
        params = np.asarray(params, dtype=float)
        view = lotto_project_width(lotto_view(params, k))
        return np.concatenate([params[:k], view.positions.reshape(-1)])

    def sampler(rng):
        return np.concatenate([rng.normal(scale=0.5, size=k),
                               rng.uniform(-1.0, 1.0, size=2 * k)])

    return GameDefinition(game_id, 3 * k, phi, grad, project, sampler,
                          info={"config": cfg})


# -- registry -----------------------------------------------------------------------

def make_game(game_id: str, base_dir=None) -> GameDefinition:
    """Build a game from its registry identifier.

    Known forms: ``disc``, ``disc:<radius>``, ``symplectic:<d>``, ``elo``,
    ``elo:<alpha>``, ``transitive``, ``blotto:<areas>:<coins>`` and
    ``lotto:<k>:<customer-file>``.  A relative customer file is resolved
    against ``base_dir`` when given.
    """
    if not isinstance(game_id, str) or not game_id:
        raise ValueError("game id must be a non-empty string")
    name, _, rest = game_id.partition(":")
    try:
        if name == "disc":
            return disc_game(float(rest) if rest else None)
        if name == "symplectic":
            return symplectic_game(int(rest))
        if name == "elo":
            return elo_functional_game(float(rest) if rest else 1.0)
        if name == "transitive" and not rest:
            return transitive_game()
        if name == "blotto":
            areas, coins = rest.split(":") if rest else (3, 10)
            return blotto_game(int(areas), int(coins))
        if name == "lotto":
            k, _, path = rest.partition(":")
            if not path:
                raise ValueError("lotto game id needs a customer file")
            full = path if base_dir is None else os.path.join(base_dir, path)
            return lotto_game(load_customers(full), int(k), customer_file=path)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad game id {game_id!r}: {exc}") from exc
    raise ValueError(f"unknown game id {game_id!r}")
