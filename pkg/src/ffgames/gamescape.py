"""Empirical gamescape analytics.

Rank, low-dimensional embeddings, 2-D hull area, hull membership and
synthetic payoff tables.  The embeddings also come as scikit-learn style
transformers whose ``transform`` maps payoff rows of new agents (payoffs
against the fitted population) into the same coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import EvalMatrix, matrix_to_csv, read_matrix_csv
from .hodge import grad_flow
from .simplex import linprog
from .validation import check_antisymmetric, check_matrix, check_random_state

RANK_TOL = 1e-10


def _skew_spectrum(A):
    """Positive eigenvalues of ``i*A`` in decreasing order with the matching
    orthonormal pairs ``(u, v)`` satisfying ``A u = lam v`` and ``A v = -lam u``."""
    n = A.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0)), np.zeros((0, 0))
    lam, Z = np.linalg.eigh(1j * A)
    order = np.argsort(-lam, kind="stable")
    lam, Z = lam[order], Z[:, order]
    npos = n // 2
    lam, Z = lam[:npos], Z[:, :npos]
    # Fix the phase: the largest-modulus component of each eigenvector is real
    # and positive (first such index on ties).
    idx = np.argmax(np.abs(Z) - 1e-12 * np.arange(n)[:, None], axis=0)
    phase = Z[idx, np.arange(npos)]
    Z = Z * (np.abs(phase) / phase)[None, :]
    U = np.sqrt(2.0) * Z.real
    V = np.sqrt(2.0) * Z.imag
    return np.maximum(lam, 0.0), U, V


def numerical_rank(A, tol=RANK_TOL) -> int:
    """Rank counted from the singular values above ``tol * max``.

    Singular values of an antisymmetric matrix come in equal pairs; counting
    the positive eigenvalues of ``i*A`` and doubling keeps the result even.
    """
    A = check_antisymmetric(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0
    lam = np.linalg.eigvalsh(1j * A)
    top = float(np.abs(lam).max())
    if top == 0.0:
        return 0
    return 2 * int((lam > tol * top).sum())


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    method: str
    recon_error: float

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 2 or c.shape[1] > max(c.shape[0], 0) or not np.all(np.isfinite(c)):
            raise ValueError("coords must be a finite n x d array with d <= n")
        if self.method not in ("schur", "pca", "svd"):
            raise ValueError(f"unknown embedding method {self.method!r}")
        object.__setattr__(self, "coords", c)

    def hull_area(self):
        return hull_area_2d(self.coords[:, :2])

    def save(self, path):
        """Write coordinates to ``path`` and a JSON sidecar to ``path + '.json'``."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(matrix_to_csv(self.coords))
        with open(path + ".json", "w", encoding="utf-8") as fh:
            json.dump({"method": self.method, "recon_error": self.recon_error,
                       "dims": int(self.coords.shape[1])}, fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path + ".json", encoding="utf-8") as fh:
            side = json.load(fh)
        coords = read_matrix_csv(path).reshape(-1, side["dims"])
        return cls(coords, side["method"], float(side["recon_error"]))


def _schur_parts(A, d):
    if d < 0 or d % 2:
        raise ValueError("Schur embedding dimension must be a nonnegative even integer")
    if d > A.shape[0]:
        raise ValueError(f"cannot embed {A.shape[0]} agents in {d} dimensions")
    lam, U, V = _skew_spectrum(A)
    if lam.size:
        lam = np.where(lam > RANK_TOL * lam[0], lam, 0.0)
    blocks = d // 2
    lam = np.concatenate([lam, np.zeros(blocks - lam.size)]) if lam.size < blocks else lam[:blocks]
    pad = blocks - U.shape[1]
    if pad > 0:
        U = np.hstack([U, np.zeros((A.shape[0], pad))])
        V = np.hstack([V, np.zeros((A.shape[0], pad))])
    return lam, U[:, :blocks], V[:, :blocks]


def _disc_coords(lam, U, V):
    root = np.sqrt(lam)
    coords = np.empty((U.shape[0], 2 * lam.size))
    coords[:, 0::2] = V * root
    coords[:, 1::2] = U * root
    return coords


def disc_reconstruct(coords) -> np.ndarray:
    """Sum of blockwise disc-game payoffs between embedded points."""
    a, b = coords[:, 0::2], coords[:, 1::2]
    return a @ b.T - b @ a.T


def schur_embedding(A, d=2) -> Embedding:
    """Embed agents so that blockwise disc-game payoffs reproduce ``A``.

    Each 2x2 block of the real Schur form ``lam * [[0, 1], [-1, 0]]`` with
    Schur vectors ``(u, v)`` contributes the point ``sqrt(lam) * (v_i, u_i)``
    for agent ``i``.  Blocks are ordered by decreasing ``lam``.  With this
    scaling, pairwise disc payoffs of the points equal the truncated matrix.
    """
    A = check_antisymmetric(np.asarray(A, dtype=float))
    lam, U, V = _schur_parts(A, d)
    coords = _disc_coords(lam, U, V)
    err = float(np.linalg.norm(A - disc_reconstruct(coords)))
    return Embedding(coords, "schur", err)


def _sign_fix(Vt):
    idx = np.argmax(np.abs(Vt), axis=1)
    signs = np.sign(Vt[np.arange(Vt.shape[0]), idx])
    signs[signs == 0] = 1.0
    return Vt * signs[:, None]


def _svd_parts(X, d):
    if not 1 <= d <= X.shape[0]:
        raise ValueError(f"dimension must be in [1, {X.shape[0]}]")
    _, _, Vt = np.linalg.svd(X, full_matrices=True)
    Vt = _sign_fix(Vt[:d])
    return Vt


def pca_embedding(A, d=2) -> Embedding:
    """Rows of ``A`` as data points, centred, projected on the top ``d`` components."""
    X = check_matrix(A)
    mean = X.mean(axis=0)
    Xc = X - mean
    Vt = _svd_parts(Xc, d)
    coords = Xc @ Vt.T
    err = float(np.linalg.norm(Xc - coords @ Vt))
    return Embedding(coords, "pca", err)


def svd_embedding(A, d=2) -> Embedding:
    """Uncentred projection of the rows of ``A`` on the top ``d`` right singular vectors."""
    X = check_matrix(A)
    Vt = _svd_parts(X, d)
    coords = X @ Vt.T
    err = float(np.linalg.norm(X - coords @ Vt))
    return Embedding(coords, "svd", err)


EMBEDDINGS = {"schur": schur_embedding, "pca": pca_embedding, "svd": svd_embedding}


def embed(A, method="schur", d=2) -> Embedding:
    try:
        fn = EMBEDDINGS[method]
    except KeyError:
        raise ValueError(f"unknown embedding method {method!r}") from None
    return fn(A, d)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> np.ndarray:
    """Hull vertices in counter-clockwise order (Andrew's monotone chain)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    uniq = sorted(set(map(tuple, pts)))
    if len(uniq) <= 2:
        return np.array(uniq).reshape(-1, 2)
    lower, upper = [], []
    for p in uniq:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(uniq):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hull_area_2d(points) -> float:
    hull = convex_hull_2d(points)
    if hull.shape[0] < 3:
        return 0.0
    x, y = hull[:, 0], hull[:, 1]
    return float(abs(x @ np.roll(y, -1) - y @ np.roll(x, -1)) / 2.0)


def redundancy_gap(A, i) -> float:
    """Smallest sup-norm distance from row ``i`` to the convex hull of the other rows."""
    M = check_matrix(A)
    n = M.shape[0]
    if n < 2:
        raise ValueError("redundancy needs at least two agents")
    if not 0 <= i < n:
        raise IndexError(i)
    others = np.delete(M, i, axis=0)
    row = M[i]
    k, m = others.shape
    # Variables (alpha_1..alpha_k, t): min t, |row - others.T @ alpha| <= t.
    c = np.zeros(k + 1)
    c[-1] = 1.0
    ones = np.ones((m, 1))
    A_ub = np.vstack([np.hstack([-others.T, -ones]), np.hstack([others.T, -ones])])
    b_ub = np.concatenate([-row, row])
    A_eq = np.zeros((1, k + 1))
    A_eq[0, :k] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.ones(1))
    alpha = res.x[:k]
    # Report the exact residual of the LP's mixture rather than the LP value.
    return float(np.abs(row - others.T @ alpha).max())


def is_redundant(A, i, tol=1e-9) -> bool:
    """True iff row ``i`` is within ``tol`` (sup norm) of a mixture of the other rows."""
    return redundancy_gap(A, i) <= tol


# -- synthetic payoffs -----------------------------------------------------------------

SYNTH_KINDS = ("random", "almost_transitive", "almost_cyclic", "mixed", "almost_monotonic")


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    n: int
    sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SYNTH_KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")


def transitive_base(n) -> np.ndarray:
    """Gradient flow of ratings equally spaced on [-1, 1]."""
    return grad_flow(np.linspace(-1.0, 1.0, n))


def cyclic_base(n, rng) -> np.ndarray:
    """Disc-game payoffs of ``n`` points equally spaced on the unit circle,
    with a random rotation and a random agent order.  Row sums vanish, so the
    matrix is purely cyclic."""
    theta = 2.0 * np.pi * np.arange(n) / n + rng.uniform(0.0, 2.0 * np.pi)
    theta = theta[rng.permutation(n)]
    return np.sin(theta[None, :] - theta[:, None])


def synth_payoff(spec: SynthSpec) -> EvalMatrix:
    rng = check_random_state(spec.seed)
    n = spec.n
    E = rng.normal(0.0, 1.0, size=(n, n)) * spec.sigma
    noise = (E - E.T) / 2.0
    trans = transitive_base(n)
    cyc = cyclic_base(n, rng)
    if spec.kind == "random":
        M = noise
    elif spec.kind == "almost_transitive":
        M = trans + noise
    elif spec.kind == "almost_cyclic":
        M = cyc + noise
    elif spec.kind == "mixed":
        M = 0.65 * (trans + noise) + 0.35 * (cyc + noise)
    else:
        M = np.sign(trans) + noise
    # Reflect the strict upper triangle so antisymmetry is exact.
    upper = np.triu(M, 1)
    return EvalMatrix(upper - upper.T, tol=0.0)


# -- scikit-learn transformers -------------------------------------------------------------

class _EvalEmbeddingBase(TransformerMixin, BaseEstimator):
    """Fit on an ``n x n`` evaluation matrix whose rows are agents."""

    def _check_fit_input(self, X):
        return check_matrix(X, "evaluation matrix")

    def _check_transform_input(self, X):
        check_is_fitted(self, "embedding_")
        X = check_matrix(np.atleast_2d(np.asarray(X, dtype=float)), "payoff rows")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} payoff columns, got {X.shape[1]}")
        return X

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_.coords.copy()


class SchurEmbedding(_EvalEmbeddingBase):
    """Disc-game (Schur) coordinates of a population.

    ``transform`` maps payoff rows ``phi(new, w_j)`` to the least-squares
    coordinates whose disc payoffs against the fitted points match them.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        A = check_antisymmetric(self._check_fit_input(X))
        lam, U, V = _schur_parts(A, self.n_components)
        self.eigenvalues_ = lam
        self.components_u_ = U
        self.components_v_ = V
        self.n_features_in_ = A.shape[0]
        self.embedding_ = schur_embedding(A, self.n_components)
        return self

    def transform(self, X):
        X = self._check_transform_input(X)
        lam = self.eigenvalues_
        safe = np.where(lam > 0, np.sqrt(np.where(lam > 0, lam, 1.0)), np.inf)
        out = np.empty((X.shape[0], 2 * lam.size))
        out[:, 0::2] = (X @ self.components_u_) / safe
        out[:, 1::2] = -(X @ self.components_v_) / safe
        return out


class PCAEmbedding(_EvalEmbeddingBase):
    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = self._check_fit_input(X)
        self.mean_ = X.mean(axis=0)
        self.components_ = _svd_parts(X - self.mean_, self.n_components)
        self.n_features_in_ = X.shape[1]
        self.embedding_ = pca_embedding(X, self.n_components)
        return self

    def transform(self, X):
        X = self._check_transform_input(X)
        return (X - self.mean_) @ self.components_.T


class SVDEmbedding(_EvalEmbeddingBase):
    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = self._check_fit_input(X)
        self.components_ = _svd_parts(X, self.n_components)
        self.n_features_in_ = X.shape[1]
        self.embedding_ = svd_embedding(X, self.n_components)
        return self

    def transform(self, X):
        X = self._check_transform_input(X)
        return X @ self.components_.T
