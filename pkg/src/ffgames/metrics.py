"""Population-level measures: relative performance, effective diversity and
the Nash-reweighted views of an evaluation matrix."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import EvalConfig, Population, cross_matrix
from .nash import NashMixture, max_entropy_nash, solve_zero_sum
from .validation import check_antisymmetric


def _as_matrix(A):
    return check_antisymmetric(np.asarray(A, dtype=float))


def _probs(p):
    return np.asarray(p.probs if isinstance(p, NashMixture) else p, dtype=float)


def _tolist(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _tolist(v) for k, v in obj.items()}
    return obj


@dataclass(frozen=True)
class PerfReport:
    value: float
    row_mixture: np.ndarray
    col_mixture: np.ndarray
    cross: np.ndarray = None

    def to_dict(self):
        return _tolist(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def relative_performance(P: Population, Q: Population, game,
                         eval_cfg: EvalConfig | None = None) -> PerfReport:
    """Value of the zero-sum game between populations ``P`` (rows) and ``Q``."""
    if P.game_id != Q.game_id:
        raise ValueError(f"populations play different games: {P.game_id!r} vs {Q.game_id!r}")
    M = cross_matrix(game, P, Q, eval_cfg)
    sol = solve_zero_sum(M)
    p, q = sol.row_mixture, sol.col_mixture
    return PerfReport(value=float(p @ M @ q), row_mixture=p, col_mixture=q, cross=M)


def diversity_l11(A, p) -> float:
    """Half the entrywise l1 norm of the Nash-reweighted matrix."""
    A = _as_matrix(A)
    p = _probs(p)
    return float(0.5 * np.abs(A * np.outer(p, p)).sum())


def effective_diversity(A, nash: NashMixture | None = None) -> float:
    """``sum_ij max(A_ij, 0) p_i p_j`` under the max-entropy Nash ``p``."""
    A = _as_matrix(A)
    p = _probs(nash if nash is not None else max_entropy_nash(A))
    return float((np.maximum(A, 0.0) * np.outer(p, p)).sum())


def nash_reweight(A, p, tol=1e-9) -> np.ndarray:
    """Entries ``A_ij p_i p_j``; rows and columns sum to zero when ``p`` is Nash."""
    A = _as_matrix(A)
    p = _probs(p)
    if p.shape != (A.shape[0],):
        raise ValueError("mixture length does not match the matrix")
    scale = max(1.0, float(np.abs(A).max()))
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol or (p @ A).min() < -tol * scale:
        raise ValueError("p is not a Nash equilibrium of A")
    return A * np.outer(p, p)


@dataclass(frozen=True)
class RpsReduction:
    """Nash mass split into the anchor, the supported agents it beats and the rest."""

    weights_r: np.ndarray
    weights_p: np.ndarray
    weights_s: np.ndarray
    meta_matrix: np.ndarray
    alpha: float

    def to_dict(self):
        return _tolist(asdict(self))


def rps_reduce(A, p, anchor, support_tol=0.0, nash_tol=1e-9) -> RpsReduction:
    """Three-way meta-game of a Nash mixture.

    Within the support of ``p`` the anchor's group ``r`` is the anchor alone,
    ``p`` collects the agents with ``A[anchor, i] > 0`` and ``s`` the rest
    (ties included).  Entries of the meta matrix are Nash-weighted payoffs
    between the groups; its ``(r, p)`` entry is returned as ``alpha``.
    """
    A = _as_matrix(A)
    probs = _probs(p)
    W = nash_reweight(A, probs, tol=nash_tol)
    support = probs > support_tol
    if support.sum() < 3:
        raise ValueError("rps reduction needs a Nash support of at least three agents")
    if not support[anchor]:
        raise ValueError("anchor has no Nash mass")
    r_mask = np.zeros_like(support)
    r_mask[anchor] = True
    beats = A[anchor] > 0
    p_mask = support & beats & ~r_mask
    s_mask = support & ~beats & ~r_mask
    masks = (r_mask, p_mask, s_mask)
    meta = np.array([[W[np.ix_(a, b)].sum() for b in masks] for a in masks])
    weights = [np.where(m, probs, 0.0) for m in masks]
    return RpsReduction(weights[0], weights[1], weights[2], meta, float(meta[0, 1]))
