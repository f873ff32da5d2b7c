"""Independent reference computations used as test oracles."""

import itertools

import numpy as np

# Filled by the acceptance tests, printed in the terminal summary.
ACCEPTANCE_LINES = []

UNIT_RPS = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])


def random_antisymmetric(rng, n, scale=1.0):
    M = rng.normal(scale=scale, size=(n, n))
    upper = np.triu(M, 1)
    return upper - upper.T


def support_enumeration_value(M, tol=1e-9):
    """Value of the zero-sum game ``M`` (rows maximize) by support enumeration.

    Tries every pair of equal-size supports, solves the indifference
    equations and keeps the first pair that is a genuine equilibrium.  Valid
    for nondegenerate games, e.g. matrices with Gaussian entries.
    """
    M = np.asarray(M, dtype=float)
    m, n = M.shape
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                sub = M[np.ix_(rows, cols)]
                # Row mixture p over rows: p @ sub = v, sum p = 1.
                K = np.zeros((k + 1, k + 1))
                K[:k, :k] = sub.T
                K[:k, k] = -1.0
                K[k, :k] = 1.0
                rhs = np.zeros(k + 1)
                rhs[k] = 1.0
                try:
                    sol_p = np.linalg.solve(K, rhs)
                    K2 = np.zeros((k + 1, k + 1))
                    K2[:k, :k] = sub
                    K2[:k, k] = -1.0
                    K2[k, :k] = 1.0
                    sol_q = np.linalg.solve(K2, rhs)
                except np.linalg.LinAlgError:
                    continue
                p_s, v = sol_p[:k], sol_p[k]
                q_s = sol_q[:k]
                if p_s.min() < -tol or q_s.min() < -tol:
                    continue
                p = np.zeros(m)
                p[list(rows)] = p_s
                q = np.zeros(n)
                q[list(cols)] = q_s
                if (p @ M).min() >= v - tol and (M @ q).max() <= v + tol:
                    return float(v)
    raise ValueError("no equilibrium found (degenerate game?)")
