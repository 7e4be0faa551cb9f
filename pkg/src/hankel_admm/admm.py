"""ADMM for the rank-constrained Hankel approximation problem.

The problem solved is::

    minimize_{A, r}  R_P(A) + 1/2 * sum_j w(j) |r(j)|^2
    subject to       A(j, k) + r(j + k) = f(j + k),   0 <= j, k <= N

where ``R_P`` is the indicator of matrices of rank at most ``P``. The
multiplier is kept as a single complex matrix; its real and imaginary parts
play the role of the two real multiplier fields of the Lagrangian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .hankel import antidiagonal_counts, antidiagonal_sums, form_hankel, rank_p_truncation
from .signal import SampledSignal

STOP_MODES = ("fixed", "residual")


@dataclass(frozen=True)
class AdmmConfig:
    """Solver settings.

    With ``normalize`` set, the observed samples are rescaled to unit peak
    modulus before iterating, which makes ``rho`` independent of the signal
    scale. All returned quantities are in the caller's units.
    """

    rank: int
    rho: float = 1.0
    max_iters: int = 200
    eps_abs: float = 1e-8
    eps_rel: float = 1e-6
    stop_mode: str = "fixed"
    normalize: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.rank < 0:
            raise ValueError(f"rank must be nonnegative, got {self.rank}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.eps_abs < 0 or self.eps_rel < 0:
            raise ValueError("stopping tolerances must be nonnegative")
        if self.stop_mode not in STOP_MODES:
            raise ValueError(f"stop_mode must be one of {STOP_MODES}, got {self.stop_mode!r}")


@dataclass
class AdmmState:
    A: np.ndarray
    r: np.ndarray
    Lambda: np.ndarray
    iter: int = 0
    primal_residual: float = math.inf
    dual_residual: float = math.inf
    singular_values: np.ndarray | None = None

    @classmethod
    def zeros(cls, n_half: int) -> "AdmmState":
        size = n_half + 1
        return cls(
            A=np.zeros((size, size), complex),
            r=np.zeros(2 * n_half + 1, complex),
            Lambda=np.zeros((size, size), complex),
        )


@dataclass
class AdmmResult:
    approximation: np.ndarray
    hankel: np.ndarray
    residual: np.ndarray
    iterations_run: int
    converged: bool
    residual_history: np.ndarray = field(repr=False)
    final_singular_values: np.ndarray = field(repr=False)


def missing_weights(missing_indices, length: int) -> np.ndarray:
    """Unit weights with zeros on ``missing_indices``."""
    idx = np.asarray(sorted(set(int(i) for i in missing_indices)), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= length):
        raise ValueError(f"missing indices must lie in [0, {length - 1}]")
    w = np.ones(length)
    w[idx] = 0.0
    return w


def admm_step(state: AdmmState, f: SampledSignal, config: AdmmConfig) -> AdmmState:
    """One ADMM iteration: rank projection, residual update, multiplier update."""
    rho = config.rho
    samples = f.samples
    n_half = f.grid.n_half
    if state.r.shape != samples.shape or state.A.shape != (n_half + 1, n_half + 1):
        raise ValueError("state dimensions do not match the signal")
    if config.rank > n_half + 1:
        raise ValueError(f"rank {config.rank} exceeds matrix size {n_half + 1}")
    q = antidiagonal_counts(n_half)

    b = form_hankel(samples - state.r) - state.Lambda / rho
    a_next, sv = rank_p_truncation(b, config.rank)
    numer = rho * q * samples - antidiagonal_sums(state.Lambda + rho * a_next)
    r_next = numer / (f.weights + rho * q)
    gap = a_next - form_hankel(samples - r_next)
    lam_next = state.Lambda + rho * gap

    return AdmmState(
        A=a_next,
        r=r_next,
        Lambda=lam_next,
        iter=state.iter + 1,
        primal_residual=float(np.linalg.norm(gap)),
        dual_residual=rho * float(np.linalg.norm(form_hankel(r_next - state.r))),
        singular_values=sv,
    )


def _converged(state: AdmmState, hf_norm: float, size: int, config: AdmmConfig) -> bool:
    primal_tol = config.eps_abs * size + config.eps_rel * hf_norm
    dual_tol = config.eps_abs * size + config.eps_rel * float(np.linalg.norm(state.Lambda))
    return state.primal_residual <= primal_tol and state.dual_residual <= dual_tol


def solve(f: SampledSignal, config: AdmmConfig) -> AdmmResult:
    """Run ADMM from zero initialization.

    Samples at zero-weight positions are overwritten with 0 before iterating.
    In ``"fixed"`` mode exactly ``max_iters`` steps are taken and
    ``converged`` reports whether the residual test would have stopped the
    run at the last step. In ``"residual"`` mode the loop stops as soon as
    both primal and dual residuals pass the test.
    """
    n_half = f.grid.n_half
    if config.rank > n_half + 1:
        raise ValueError(f"rank {config.rank} exceeds matrix size {n_half + 1}")
    samples = np.where(f.observed, f.samples, 0)
    scale = 1.0
    if config.normalize:
        peak = float(np.max(np.abs(samples)))
        if peak > 0:
            scale = peak
    work = SampledSignal(samples / scale, f.weights, f.grid)
    hf_norm = float(np.linalg.norm(form_hankel(work.samples)))
    size = n_half + 1

    state = AdmmState.zeros(n_half)
    history = []
    converged = False
    for _ in range(config.max_iters):
        state = admm_step(state, work, config)
        history.append((state.primal_residual, state.dual_residual))
        converged = _converged(state, hf_norm, size, config)
        if converged and config.stop_mode == "residual":
            break

    q = antidiagonal_counts(n_half)
    a = state.A * scale
    sv = np.linalg.svd(a, compute_uv=False)
    return AdmmResult(
        approximation=antidiagonal_sums(a) / q,
        hankel=a,
        residual=state.r * scale,
        iterations_run=state.iter,
        converged=converged,
        residual_history=np.asarray(history, dtype=float).reshape(-1, 2),
        final_singular_values=sv,
    )


def with_rank(config: AdmmConfig, rank: int) -> AdmmConfig:
    return replace(config, rank=rank)
