"""Node extraction from a low-rank Hankel matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, RankDeficiencyError
from .hankel import RANK_RTOL, form_hankel
from .signal import SampledSignal, SampleGrid

# Condition number of the row-deleted basis above which the pencil is refused.
PENCIL_COND_LIMIT = 1e10


@dataclass(frozen=True)
class NodeSet:
    nodes: np.ndarray
    condition: float = 1.0

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=complex))
        if not np.all(np.isfinite(nodes)):
            raise ValueError("nodes must be finite")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class PhysicalNodes:
    freqs: np.ndarray
    dampings: np.ndarray


def sort_nodes(nodes) -> np.ndarray:
    """Order by imaginary part, ties broken by real part."""
    nodes = np.asarray(nodes, dtype=complex)
    return nodes[np.lexsort((nodes.real, nodes.imag))]


def shift_invariance_nodes(basis: np.ndarray) -> NodeSet:
    """Nodes from the rotational invariance of a Vandermonde-spanned basis.

    ``basis`` has orthonormal (or merely independent) columns spanning the
    column space of a Vandermonde matrix ``V(j, p) = exp(zeta_p j)``.
    """
    upper = basis[:-1]
    lower = basis[1:]
    sv = np.linalg.svd(upper, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not cond < PENCIL_COND_LIMIT:
        raise IllConditionedError(f"shift-invariance pencil is ill-conditioned (cond={cond:.3g})")
    rotation, *_ = np.linalg.lstsq(upper, lower, rcond=None)
    eig = np.linalg.eigvals(rotation)
    if np.any(np.abs(eig) <= np.finfo(float).tiny) or not np.all(np.isfinite(eig)):
        raise IllConditionedError("shift-invariance pencil has a zero eigenvalue")
    return NodeSet(sort_nodes(np.log(eig)), cond)


def extract_nodes(a, rank: int) -> NodeSet:
    """Nodes of a rank-``rank`` Hankel matrix from its dominant column space.

    The leading left singular vectors span the same space as the
    con-eigenvectors of the (complex symmetric) Hankel matrix, so either
    basis yields the same shift-invariance eigenvalues.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if rank < 1:
        return NodeSet(np.zeros(0, complex))
    if a.shape[0] < rank + 1:
        raise ValueError(f"matrix of size {a.shape[0]} cannot resolve {rank} nodes")
    u, s, _ = np.linalg.svd(a)
    if s[0] <= 0 or s[rank - 1] <= RANK_RTOL * s[0]:
        raise RankDeficiencyError(
            f"matrix has numerical rank below {rank} "
            f"(sigma_{rank - 1}/sigma_0 = {s[rank - 1] / s[0] if s[0] > 0 else 0:.3g})"
        )
    return shift_invariance_nodes(u[:, :rank])


def select_order(f: SampledSignal, threshold: float) -> int:
    """Count singular values of the data Hankel matrix above ``threshold * sigma_0``."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    samples = np.where(f.observed, f.samples, 0)
    s = np.linalg.svd(form_hankel(samples), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > threshold * s[0]))


def nodes_to_physical(nodes: NodeSet, grid: SampleGrid) -> PhysicalNodes:
    z = nodes.nodes / (2 * np.pi * grid.ts)
    return PhysicalNodes(freqs=z.imag.copy(), dampings=z.real.copy())
