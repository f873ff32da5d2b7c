"""Combinatorial Hodge decomposition of evaluation matrices.

On a finite population with the uniform measure, every antisymmetric matrix
splits orthogonally into a gradient flow of ratings (transitive part) and a
divergence-free remainder (cyclic part).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import matrix_to_csv, read_matrix_csv
from .validation import check_antisymmetric

CURL_MATERIALIZE_LIMIT = 64


def _as_matrix(A):
    return check_antisymmetric(np.asarray(A, dtype=float))


def divergence(A) -> np.ndarray:
    """``(1/n) A @ 1``: average payoff of each agent against the population."""
    A = _as_matrix(A)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    return A.sum(axis=1) / n


def grad_flow(r) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1)
    if not np.all(np.isfinite(r)):
        raise ValueError("ratings must be finite")
    return r[:, None] - r[None, :]


class CurlTensor:
    """Lazy ``T[i, j, k] = A[i, j] + A[j, k] - A[i, k]`` for large populations."""

    def __init__(self, A):
        self.A = A

    @property
    def shape(self):
        n = self.A.shape[0]
        return (n, n, n)

    def __getitem__(self, idx):
        i, j, k = idx
        return self.A[i, j] + self.A[j, k] - self.A[i, k]

    def max_abs(self):
        A = self.A
        # Loop over i to keep memory at O(n^2).
        return max((float(np.abs(A[i][:, None] + A - A[i][None, :]).max())
                    for i in range(A.shape[0])), default=0.0)


def curl(A, materialize=None):
    """Curl of a flow.

    Returns a dense ``(n, n, n)`` array when ``n <= 64`` (or when
    ``materialize`` is true) and a lazily evaluated :class:`CurlTensor`
    otherwise.
    """
    A = _as_matrix(A)
    n = A.shape[0]
    if materialize is None:
        materialize = n <= CURL_MATERIALIZE_LIMIT
    if not materialize:
        return CurlTensor(A.copy())
    return A[:, :, None] + A[None, :, :] - A[:, None, :]


@dataclass(frozen=True)
class HodgeParts:
    transitive: np.ndarray
    cyclic: np.ndarray
    ratings: np.ndarray

    def norms(self):
        """Frobenius norms of the two parts."""
        return {"transitive": float(np.linalg.norm(self.transitive)),
                "cyclic": float(np.linalg.norm(self.cyclic))}

    def save(self, directory, prefix="hodge"):
        os.makedirs(directory, exist_ok=True)
        paths = {}
        for name, arr in (("transitive", self.transitive), ("cyclic", self.cyclic),
                          ("ratings", self.ratings.reshape(-1, 1))):
            path = os.path.join(directory, f"{prefix}_{name}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(matrix_to_csv(arr))
            paths[name] = path
        return paths

    @classmethod
    def load(cls, directory, prefix="hodge"):
        def read(name):
            return read_matrix_csv(os.path.join(directory, f"{prefix}_{name}.csv"))
        return cls(read("transitive"), read("cyclic"), read("ratings").reshape(-1))


def hodge_decompose(A) -> HodgeParts:
    A = _as_matrix(A)
    ratings = divergence(A)
    transitive = grad_flow(ratings)
    return HodgeParts(transitive=transitive, cyclic=A - transitive, ratings=ratings)
