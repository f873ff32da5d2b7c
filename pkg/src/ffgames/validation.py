"""Input validation helpers shared by the solvers and estimators."""

from __future__ import annotations

import numpy as np


class NotAntisymmetricError(ValueError):
    pass


def check_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def check_square(M, name="matrix"):
    A = check_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def antisymmetry_defect(A):
    """Largest |A[i, j] + A[j, i]| over all index pairs (diagonal included)."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A + A.T)))


def check_antisymmetric(M, tol=1e-9, name="matrix"):
    """Return ``M`` as a float array after checking ``|A + A.T| <= tol``.

    The tolerance is scaled by the largest entry so that payoffs measured in
    large units are not rejected for rounding noise.
    """
    A = check_square(M, name)
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    defect = antisymmetry_defect(A)
    if defect > tol * scale:
        raise NotAntisymmetricError(
            f"{name} is not antisymmetric: max |A + A.T| = {defect:.3e}")
    return A


def check_distribution(p, n=None, tol=1e-9, name="p"):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if n is not None and p.shape[0] != n:
        raise ValueError(f"{name} has length {p.shape[0]}, expected {n}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        raise ValueError(f"{name} is not a probability vector")
    return p


def check_weights(w, n):
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    return w


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
