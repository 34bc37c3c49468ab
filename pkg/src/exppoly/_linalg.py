"""Rank decisions and orthogonal-basis helpers shared across modules."""
from __future__ import annotations

import numpy as np
import scipy.linalg


def singular_values(mat: np.ndarray) -> np.ndarray:
    if mat.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(mat)


def numerical_rank(mat: np.ndarray, tol: float, scale: float | None = None) -> int:
    """Count singular values above ``tol * scale`` (scale defaults to sigma_1)."""
    sv = singular_values(mat)
    if sv.size == 0:
        return 0
    ref = sv[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(sv > tol * ref))


def null_space(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal columns spanning the numerical kernel (relative threshold)."""
    n = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, vh = scipy.linalg.svd(mat, full_matrices=True)
    if sv.size == 0 or sv[0] == 0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(sv > tol * sv[0]))
    return vh[rank:].conj().T


def range_basis(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal columns spanning the numerical range."""
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, sv, _ = scipy.linalg.svd(mat, full_matrices=False)
    if sv[0] == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    rank = int(np.sum(sv > tol * sv[0]))
    return u[:, :rank]


def normalize_columns(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale columns to unit 2-norm; zero columns are left alone."""
    norms = np.linalg.norm(mat, axis=0)
    norms = np.where(norms > 0, norms, 1.0)
    return mat / norms, norms


def select_independent(candidates: np.ndarray, tol: float, within: np.ndarray | None = None) -> list[int]:
    """Greedily pick candidate columns that raise the numerical rank.

    Columns are normalised first, so ``tol`` compares sigma_k / sigma_1 of the
    chosen set.  If ``within`` (orthonormal columns) is given, candidates not
    lying in that span are skipped.
    """
    chosen: list[int] = []
    cols, _ = normalize_columns(np.asarray(candidates, dtype=complex))
    for k in range(cols.shape[1]):
        v = cols[:, k]
        if not np.any(v):
            continue
        if within is not None:
            resid = v - within @ (within.conj().T @ v)
            if np.linalg.norm(resid) > np.sqrt(tol):
                continue
        if len(chosen) + 1 > cols.shape[0]:
            break
        sv = singular_values(cols[:, chosen + [k]])
        if sv[len(chosen)] > tol * sv[0]:
            chosen.append(k)
    return chosen
