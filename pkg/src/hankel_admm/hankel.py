"""Hankel matrices, their adjoint and rank truncation."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg

# Singular values below this fraction of the largest are treated as zero.
RANK_RTOL = 1e-10


def _half_size(length: int) -> int:
    if length < 3 or length % 2 == 0:
        raise ValueError(f"generator length must be odd and >= 3, got {length}")
    return (length - 1) // 2


def form_hankel(g) -> np.ndarray:
    """Return the ``(N+1, N+1)`` matrix ``A[j, k] = g[j + k]``."""
    g = np.asarray(g, dtype=complex)
    if g.ndim != 1:
        raise ValueError("generator must be one-dimensional")
    n = _half_size(g.size)
    return scipy.linalg.hankel(g[: n + 1], g[n:])


@lru_cache(maxsize=32)
def _antidiagonal_index(size: int) -> np.ndarray:
    idx = np.add.outer(np.arange(size), np.arange(size)).ravel()
    idx.setflags(write=False)
    return idx


def antidiagonal_sums(m) -> np.ndarray:
    """Sum each anti-diagonal of a square matrix (adjoint of ``form_hankel``)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    size = m.shape[0]
    idx = _antidiagonal_index(size)
    out_len = 2 * size - 1
    flat = m.ravel()
    if np.iscomplexobj(flat):
        return np.bincount(idx, flat.real, out_len) + 1j * np.bincount(idx, flat.imag, out_len)
    return np.bincount(idx, flat, out_len).astype(complex)


def antidiagonal_counts(n_half: int) -> np.ndarray:
    """Number of entries on each anti-diagonal of an ``(N+1, N+1)`` matrix."""
    if n_half < 1:
        raise ValueError(f"N must be >= 1, got {n_half}")
    l = np.arange(2 * n_half + 1)
    return np.where(l <= n_half, l + 1, 2 * n_half + 1 - l)


def rank_p_truncation(m, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-``rank`` approximation in Frobenius norm.

    Returns the truncated matrix and the full vector of singular values
    of ``m`` (descending).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not 0 <= rank <= m.shape[0]:
        raise ValueError(f"rank must lie in [0, {m.shape[0]}], got {rank}")
    u, s, vh = np.linalg.svd(m)
    if rank == 0:
        return np.zeros_like(m), s
    return (u[:, :rank] * s[:rank]) @ vh[:rank], s


def numerical_rank(singular_values, rtol: float = RANK_RTOL) -> int:
    """Count singular values above ``rtol`` times the largest one."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))
