"""Nash equilibria of zero-sum matrix games.

All solvers go through the simplex routine in :mod:`ffgames.simplex`.  For a
symmetric (antisymmetric-payoff) game the value is zero and the equilibria of
either player form the polytope ``{p in simplex : p @ A >= 0}``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .simplex import LPError, linprog
from .validation import check_antisymmetric, check_matrix


class NashSolverError(ArithmeticError):
    pass


@dataclass(frozen=True)
class NashMixture:
    probs: np.ndarray
    residual: float
    entropy: float

    @property
    def support(self):
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True)
class ZeroSumSolution:
    row_mixture: np.ndarray
    col_mixture: np.ndarray
    value: float


@dataclass(frozen=True)
class NashReport:
    min_payoff: float
    min_prob: float
    sum_error: float
    is_distribution: bool
    passed: bool

    def to_dict(self):
        return asdict(self)


def entropy(p):
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _clean(p):
    p = np.where(p > 0, p, 0.0)
    return p / p.sum()


def _column_player_lp(M):
    """Minimax mixture of the column (minimizing) player of ``M``.

    Uses the classic shift to a strictly positive game so that the origin is a
    feasible basis: ``max 1@y  s.t.  M' y <= 1, y >= 0``.
    """
    lo, hi = float(M.min()), float(M.max())
    scale = hi - lo if hi > lo else 1.0
    shifted = (M - lo) / scale + 1.0
    res = linprog(-np.ones(M.shape[1]), A_ub=shifted, b_ub=np.ones(M.shape[0]))
    total = res.x.sum()
    if not total > 0:
        raise NashSolverError("degenerate minimax LP")
    return _clean(res.x / total)


def solve_zero_sum(A, tol=1e-9) -> ZeroSumSolution:
    """Minimax solution of the zero-sum game where rows maximize ``A``."""
    M = check_matrix(A, "payoff matrix")
    if M.size == 0:
        raise ValueError("payoff matrix is empty")
    try:
        q = _column_player_lp(M)
        p = _column_player_lp(-M.T)
    except LPError as exc:
        raise NashSolverError(str(exc)) from exc
    value = float(p @ M @ q)
    scale = max(1.0, float(np.abs(M).max()))
    if (p @ M).min() < value - tol * scale or (M @ q).max() > value + tol * scale:
        raise NashSolverError("minimax LP returned an infeasible pair")
    return ZeroSumSolution(row_mixture=p, col_mixture=q, value=value)


def _mixture(A, p):
    return NashMixture(probs=p, residual=float((p @ A).min()), entropy=entropy(p))


def solve_symmetric_nash(A, tol=1e-9) -> NashMixture:
    """A Nash mixture ``p`` of the symmetric game, ``p @ A >= -tol``."""
    A = check_antisymmetric(A)
    if A.shape[0] == 0:
        raise ValueError("empty matrix")
    try:
        p = _column_player_lp(-A.T)
    except LPError as exc:
        raise NashSolverError(str(exc)) from exc
    mix = _mixture(A, p)
    if mix.residual < -tol * max(1.0, float(np.abs(A).max())):
        raise NashSolverError(f"Nash LP residual {mix.residual:.3e} exceeds tolerance")
    return mix


def _nash_lp(A, weights):
    """Maximize ``weights @ p`` over the Nash polytope of antisymmetric ``A``."""
    n = A.shape[0]
    # p @ A >= 0  <=>  A @ p <= 0 for antisymmetric A.
    res = linprog(-weights, A_ub=A, b_ub=np.zeros(n),
                  A_eq=np.ones((1, n)), b_eq=np.ones(1))
    return np.maximum(res.x, 0.0)


def maximal_support(A, threshold=1e-9):
    """Indices that carry mass in some Nash equilibrium, plus a Nash point
    whose support is exactly that set (the average of the LP witnesses)."""
    n = A.shape[0]
    unknown = np.ones(n, dtype=bool)
    support = np.zeros(n, dtype=bool)
    witnesses = []
    while unknown.any():
        p = _nash_lp(A, unknown.astype(float))
        found = unknown & (p > threshold)
        if not found.any():
            break
        witnesses.append(p)
        support |= found
        unknown &= ~found
    return np.flatnonzero(support), np.mean(witnesses, axis=0)


def _null_space(E, rcond=1e-10):
    if E.shape[0] == 0:
        return np.eye(E.shape[1])
    _, s, vt = np.linalg.svd(E)
    rank = int((s > rcond * max(1.0, s[0] if s.size else 0.0)).sum())
    return vt[rank:].T


def _max_entropy_on_face(A_s, support_cols, p0, max_iter, tol, bias=None):
    """Active-set Newton ascent of ``entropy(p) + bias @ p`` over
    ``{p > 0, 1@p = 1, A_s[:, j] @ p = 0 for j in support_cols,
    A_s[:, j] @ p >= 0 otherwise}``.

    ``A_s`` holds the support rows of the full matrix (all columns)."""
    s, n = A_s.shape
    p = p0.copy()
    bias = np.zeros(s) if bias is None else bias

    def objective(x):
        return entropy(x) + float(bias @ x)

    equal = set(int(j) for j in support_cols)
    slack = p @ A_s
    active = set(j for j in range(n) if j not in equal and slack[j] <= 1e-12)

    def basis():
        cols = sorted(equal | active)
        E = np.vstack([A_s[:, cols].T, np.ones((1, s))])
        return cols, _null_space(E)

    cols, N = basis()
    for _ in range(max_iter):
        grad = bias - np.log(p) - 1.0
        if N.shape[1]:
            # Newton system (N' diag(1/p) N) dz = N' grad as least squares on
            # diag(p^-1/2) N: masses near 1e-18 occur at genuine optima and
            # would make the normal equations singular.
            root = np.sqrt(p)
            dz, *_ = np.linalg.lstsq(N / root[:, None], root * grad, rcond=None)
            dp = N @ dz
            decrement = float(grad @ dp)
        else:
            dp = np.zeros(s)
            decrement = 0.0
        # Objective gap below rounding level (relative to the gradient size).
        if decrement <= 1e-15 * (1.0 + float(np.abs(grad).max()) ** 2):
            # Stationary on this face; release inequality constraints whose
            # multipliers have the wrong sign.
            ineq = [j for j in cols if j not in equal]
            if not ineq:
                return p
            K = np.hstack([A_s[:, cols], np.ones((s, 1))])
            mult, *_ = np.linalg.lstsq(K, np.log(p) + 1.0 - bias, rcond=None)
            worst, worst_j = -tol, None
            for k, j in enumerate(cols):
                if j in active and mult[k] < worst:
                    worst, worst_j = mult[k], j
            if worst_j is None:
                return p
            active.discard(worst_j)
            cols, N = basis()
            continue

        step = 1.0
        neg = dp < 0
        if neg.any():
            step = min(step, 0.95 * float(np.min(-p[neg] / dp[neg])))
        c = p @ A_s
        dc = dp @ A_s
        blocking = None
        for j in range(n):
            if j in equal or j in active or dc[j] >= 0:
                continue
            t = max(c[j], 0.0) / -dc[j]
            if t < step:
                step, blocking = t, j
        if blocking is None:
            # Armijo backtracking on the concave entropy.
            h0 = objective(p)
            while step > 1e-12 and objective(p + step * dp) < h0 + 1e-4 * step * decrement:
                step *= 0.5
        p = p + step * dp
        p = np.maximum(p, 1e-300)
        if blocking is not None:
            active.add(blocking)
            cols, N = basis()
    raise NashSolverError("max-entropy Nash did not converge")


def duplicate_classes(A):
    """Group indices whose rows of ``A`` are exactly equal.

    Returns ``(first, inverse, counts)``: the first index of each class in
    order of appearance, the class of every index and the class sizes.
    """
    A = np.asarray(A, dtype=float)
    _, first, inverse, counts = np.unique(A, axis=0, return_index=True,
                                          return_inverse=True, return_counts=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return first[order], rank[inverse.reshape(-1)], counts[order]


def max_entropy_nash(A, tol=1e-8, max_iter=10_000) -> NashMixture:
    """The Nash mixture of largest Shannon entropy.

    The maximal Nash support ``S`` is found with LPs; on ``S`` every
    equilibrium makes the columns in ``S`` exactly indifferent, so the search
    runs on that face with the remaining column constraints handled by an
    active set.

    Identical agents (equal rows) share their class mass equally at the
    optimum, so the search runs over classes with the entropy of the split
    (``q_c log m_c`` for a class of size ``m_c``) added to the objective.
    """
    A = check_antisymmetric(A)
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    scale = float(np.abs(A).max())
    if scale == 0.0:
        p = np.full(n, 1.0 / n)
        return _mixture(A, p)
    first, inverse, counts = duplicate_classes(A)
    Ac = A[np.ix_(first, first)] / scale
    try:
        support, q_bar = maximal_support(Ac)
    except LPError as exc:
        raise NashSolverError(str(exc)) from exc

    def expand(q):
        return _clean(q[inverse] / counts[inverse])

    if support.size == 1:
        q = np.zeros(first.size)
        q[support[0]] = 1.0
        return _mixture(A, expand(q))

    q_face = _max_entropy_on_face(Ac[support], support, q_bar[support], max_iter, tol,
                                  bias=np.log(counts[support]))
    q = np.zeros(first.size)
    q[support] = q_face
    mix = _mixture(A, expand(q))
    fallback = _mixture(A, expand(q_bar))
    if mix.residual < -tol * scale or mix.entropy < fallback.entropy - tol:
        # Feasibility restoration: the LP witness is feasible by construction.
        if fallback.residual < -tol * scale:
            raise NashSolverError("max-entropy Nash is infeasible")
        return fallback
    return mix


def verify_nash(A, p, tol=1e-9) -> NashReport:
    """Check that ``p`` is a distribution with ``p @ A >= -tol``."""
    A = check_matrix(A)
    p = np.asarray(p, dtype=float)
    if p.shape != (A.shape[0],):
        raise ValueError(f"mixture length {p.shape} does not match matrix {A.shape}")
    min_payoff = float((p @ A).min())
    min_prob = float(p.min())
    sum_error = float(abs(p.sum() - 1.0))
    is_dist = min_prob >= -tol and sum_error <= tol
    return NashReport(min_payoff=min_payoff, min_prob=min_prob, sum_error=sum_error,
                      is_distribution=bool(is_dist),
                      passed=bool(is_dist and min_payoff >= -tol))
