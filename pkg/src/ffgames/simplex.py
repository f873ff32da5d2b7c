"""Two-phase revised simplex method.

Solves

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

The basis inverse is refactorized from the original data every few pivots,
so rounding errors do not accumulate (which matters on the highly degenerate
Nash LPs of nearly transitive populations).  Degeneracy is removed by
relaxing inequality right-hand sides by tiny amounts; the relaxed optimal
basis is then carried back to the exact data with dual simplex pivots.
Pricing uses the most negative reduced cost; after a long run of degenerate
pivots it switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LPError(ArithmeticError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    n_pivots: int


def _solve(B, rhs):
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError as exc:
        raise LPError("singular basis") from exc


def _iterate(A, b, c, basis, allowed, tol, max_iter, count, refactor=32):
    """Run primal simplex pivots from a feasible ``basis`` until optimal.

    The basis inverse gets a rank-one (eta) update per pivot and is
    recomputed from scratch every ``refactor`` pivots.
    """
    m = A.shape[0]
    cscale = max(1.0, float(np.abs(c).max()) if c.size else 1.0)
    degenerate = 0
    bland = False
    since = refactor
    while True:
        if since >= refactor:
            try:
                Binv = np.linalg.inv(A[:, basis])
            except np.linalg.LinAlgError as exc:
                raise LPError("singular basis") from exc
            since = 0
        xB = np.maximum(Binv @ b, 0.0)
        y = c[basis] @ Binv
        d = c - A.T @ y
        d[basis] = 0.0
        cand = np.flatnonzero(allowed & (d < -tol * cscale))
        if cand.size == 0:
            if since:
                # Confirm optimality with a fresh factorization.
                since = refactor
                continue
            return basis, count
        q = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
        u = Binv @ A[:, q]
        piv_tol = tol * max(1.0, float(np.abs(u).max()))
        rows = np.flatnonzero(u > piv_tol)
        if rows.size == 0:
            if since:
                since = refactor
                continue
            raise Unbounded("linear program is unbounded")
        ratios = xB[rows] / u[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        if bland:
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            r = int(ties[np.argmax(u[ties])])
        degenerate = degenerate + 1 if best <= tol else 0
        if degenerate > 2 * m + 20:
            bland = True
        basis = basis.copy()
        basis[r] = q
        pivot_row = Binv[r] / u[r]
        Binv -= np.outer(u, pivot_row)
        Binv[r] = pivot_row
        since += 1
        count += 1
        if count > max_iter:
            raise LPError(f"simplex exceeded {max_iter} pivots")


def _dual_iterate(A, b, c, basis, allowed, tol, max_iter, count):
    """Dual simplex pivots from a dual-feasible ``basis`` until primal feasible."""
    bscale = max(1.0, float(np.abs(b).max()))
    while True:
        B = A[:, basis]
        xB = _solve(B, b)
        r = int(np.argmin(xB))
        if xB[r] >= -1e-12 * bscale:
            return basis, count
        y = _solve(B.T, c[basis])
        d = c - A.T @ y
        e = np.zeros(A.shape[0])
        e[r] = 1.0
        alpha = _solve(B.T, e) @ A
        alpha[basis] = 0.0
        cand = np.flatnonzero(allowed & (alpha < -tol * max(1.0, float(np.abs(alpha).max()))))
        if cand.size == 0:
            raise Infeasible("linear program is infeasible")
        ratios = np.maximum(d[cand], 0.0) / -alpha[cand]
        best = ratios.min()
        ties = cand[ratios <= best + 1e-12 * max(1.0, best)]
        q = int(ties[np.argmin(alpha[ties])])
        basis = basis.copy()
        basis[r] = q
        count += 1
        if count > max_iter:
            raise LPError(f"simplex exceeded {max_iter} pivots")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol=1e-10,
            max_iter=100_000, perturb=True) -> LPResult:
    """Minimize ``c @ x`` subject to the constraints and ``x >= 0``.

    With ``perturb`` the inequality right-hand sides are first relaxed by tiny
    fixed amounts, which removes the degeneracy that makes simplex stall on
    Nash LPs.  The optimal basis of the relaxed problem is then re-solved with
    the exact data; if it is not feasible there, the exact problem is solved
    from scratch.
    """
    if perturb:
        try:
            return _linprog(c, A_ub, b_ub, A_eq, b_eq, tol, max_iter, True)
        except _PerturbationFailed:
            pass
    return _linprog(c, A_ub, b_ub, A_eq, b_eq, tol, max_iter, False)


class _PerturbationFailed(LPError):
    pass


def _linprog(c, A_ub, b_ub, A_eq, b_eq, tol, max_iter, perturb):
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    if A_ub.shape != (b_ub.size, n) or A_eq.shape != (b_eq.size, n):
        raise ValueError("constraint shapes do not match")
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if m == 0:
        if np.any(c < 0):
            raise Unbounded("linear program is unbounded")
        return LPResult(np.zeros(n), 0.0, 0)

    # Standard form over [x, slacks, artificials]; rows flipped so that b >= 0.
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b_exact = np.concatenate([b_ub, b_eq])
    b = b_exact.copy()
    if perturb and m_ub:
        # Deterministic relaxation pattern; ub rows only so that equality
        # systems stay consistent.
        scale_b = max(1.0, float(np.abs(b).max()))
        b[:m_ub] += 1e-7 * scale_b * (1.0 + (np.arange(m_ub) * 0.6180339887498949) % 1.0)
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    b_exact[flip] *= -1.0
    n_std = n + m_ub

    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = flip[:m_ub]
    art_rows = np.flatnonzero(needs_art)
    k = art_rows.size
    A_full = np.hstack([A, np.zeros((m, k))])
    A_full[art_rows, n_std + np.arange(k)] = 1.0
    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    basis[art_rows] = n_std + np.arange(k)

    count = 0
    if k:
        c1 = np.zeros(n_std + k)
        c1[n_std:] = 1.0
        allowed = np.ones(n_std + k, dtype=bool)
        basis, count = _iterate(A_full, b, c1, basis, allowed, tol, max_iter, count)
        xB = _solve(A_full[:, basis], b)
        scale = max(1.0, float(np.abs(b).max()))
        if float(c1[basis] @ xB) > 1e-9 * scale:
            raise Infeasible("linear program is infeasible")
        # Drive zero-level artificials out of the basis; drop redundant rows.
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] < n_std:
                continue
            e = np.zeros(m)
            e[r] = 1.0
            row = _solve(A_full[:, basis].T, e) @ A
            row[basis[basis < n_std]] = 0.0
            cols = np.flatnonzero(np.abs(row) > 1e-9 * max(1.0, float(np.abs(row).max())))
            if cols.size:
                basis[r] = int(cols[np.argmax(np.abs(row[cols]))])
                count += 1
            else:
                keep[r] = False
        A = A[keep]
        b = b[keep]
        b_exact = b_exact[keep]
        basis = basis[keep]
        if np.any(basis >= n_std):
            raise LPError("could not remove artificial variables")

    c2 = np.concatenate([c, np.zeros(m_ub)])
    x_std = np.zeros(n_std)
    if basis.size:
        allowed = np.ones(n_std, dtype=bool)
        basis, count = _iterate(A, b, c2, basis, allowed, tol, max_iter, count)
        xB = _solve(A[:, basis], b_exact)
        if perturb:
            # Finish on the exact data: the relaxed optimum is dual feasible,
            # so dual pivots repair any small primal infeasibility, and primal
            # pivots then confirm optimality.  Usually neither pivots at all.
            try:
                basis, count = _dual_iterate(A, b_exact, c2, basis, allowed, tol, max_iter,
                                             count)
                basis, count = _iterate(A, b_exact, c2, basis, allowed, tol, max_iter, count)
            except LPError as exc:
                raise _PerturbationFailed(str(exc)) from exc
            xB = _solve(A[:, basis], b_exact)
        x_std[basis] = np.maximum(xB, 0.0)
    elif np.any(c2 < 0):
        raise Unbounded("linear program is unbounded")
    x = x_std[:n]
    return LPResult(x=x, fun=float(c @ x), n_pivots=count)
