"""Benchmark harness: ESPRIT baseline, Cramer-Rao bounds and Monte-Carlo runs."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .admm import AdmmConfig, solve
from .errors import EstimationError, SingularInformationError, UnsupportedInputError
from .nodes import NodeSet, extract_nodes, shift_invariance_nodes
from .signal import (
    ExponentialModel,
    NoiseSpec,
    PhysicalModel,
    SampledSignal,
    SampleGrid,
    add_noise,
    noise_variance,
    random_phases,
    synthesize,
)

# Fisher matrices whose (diagonally scaled) condition exceeds this are singular.
FISHER_COND_LIMIT = 1e14


def esprit(f: SampledSignal, rank: int, subspace_rows: int | None = None) -> NodeSet:
    """Least-squares ESPRIT on the ``L x (2N+2-L)`` data Hankel matrix."""
    if np.any(f.weights != 1):
        raise UnsupportedInputError("ESPRIT needs complete, unweighted data")
    n = f.grid.length
    rows = f.grid.n_half + 1 if subspace_rows is None else int(subspace_rows)
    if not rank <= rows <= n - rank:
        raise ValueError(f"subspace rows must lie in [{rank}, {n - rank}], got {rows}")
    if rank < 1:
        return NodeSet(np.zeros(0, complex))
    data = f.samples
    mat = np.lib.stride_tricks.sliding_window_view(data, n + 1 - rows).copy()[:rows]
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    return shift_invariance_nodes(u[:, :rank])


@dataclass(frozen=True)
class CramerRaoBound:
    """Variance bounds in the units of the grid's time axis."""

    freqs: np.ndarray
    dampings: np.ndarray
    fisher: np.ndarray = field(repr=False)


def crb(model: ExponentialModel, grid: SampleGrid, noise_var: float, weights=None) -> CramerRaoBound:
    """Cramer-Rao bounds on ``nu_p`` and ``gamma_p`` under circular Gaussian noise.

    The real parameter vector is ordered ``(Re c_p, Im c_p, gamma_p, nu_p)``
    per component. With ``E|e|^2 = noise_var`` the Fisher information is
    ``2/noise_var * Re(J^H W J)``.
    """
    if not (noise_var > 0 and math.isfinite(noise_var)):
        raise ValueError(f"noise variance must be positive, got {noise_var}")
    w = np.ones(grid.length) if weights is None else np.asarray(weights, dtype=float)
    j = grid.indices.astype(float)
    basis = np.exp(np.outer(j, model.nodes))
    dz = 2 * np.pi * grid.ts * j[:, None] * basis * model.amplitudes
    P = model.order
    jac = np.empty((grid.length, 4 * P), complex)
    jac[:, 0::4] = basis
    jac[:, 1::4] = 1j * basis
    jac[:, 2::4] = dz
    jac[:, 3::4] = 1j * dz
    fisher = (2.0 / noise_var) * np.real(jac.conj().T @ (w[:, None] * jac))

    d = np.sqrt(np.diag(fisher))
    if np.any(d == 0) or not np.all(np.isfinite(d)):
        raise SingularInformationError("a parameter has zero Fisher information")
    scaled = fisher / np.outer(d, d)
    ev = np.linalg.eigvalsh(scaled)
    if ev[0] <= ev[-1] / FISHER_COND_LIMIT:
        raise SingularInformationError(f"Fisher information is singular (cond={ev[-1] / max(ev[0], 1e-300):.3g})")
    cov = np.linalg.inv(scaled) / np.outer(d, d)
    diag = np.diag(cov)
    return CramerRaoBound(freqs=diag[3::4].copy(), dampings=diag[2::4].copy(), fisher=fisher)


@dataclass(frozen=True)
class MatchResult:
    """``estimated[permutation[p]]`` is paired with ``truth[p]``."""

    permutation: np.ndarray
    matched: np.ndarray
    errors: np.ndarray

    @property
    def freq_errors(self) -> np.ndarray:
        return np.abs(self.errors.imag) / (2 * np.pi)

    @property
    def damping_errors(self) -> np.ndarray:
        return np.abs(self.errors.real) / (2 * np.pi)

    @property
    def cost(self) -> float:
        return float(np.abs(self.errors).sum())


def match_nodes(estimated, truth) -> MatchResult:
    """Minimum total ``|zeta_hat - zeta|`` assignment of estimates to truth.

    Errors are per-sample node differences; ``freq_errors`` and
    ``damping_errors`` are in cycles per sample.
    """
    est = np.asarray(getattr(estimated, "nodes", estimated), dtype=complex)
    ref = np.asarray(getattr(truth, "nodes", truth), dtype=complex)
    if est.size != ref.size:
        raise ValueError(f"cannot match {est.size} estimates to {ref.size} nodes")
    cost = np.abs(ref[:, None] - est[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(ref.size, dtype=int)
    perm[rows] = cols
    matched = est[perm]
    return MatchResult(permutation=perm, matched=matched, errors=matched - ref)


@dataclass(frozen=True)
class MissingPattern:
    """Which samples are dropped in each realization.

    ``kind`` is one of ``"none"``, ``"random"`` (``count`` positions drawn
    per realization), ``"block"`` (one run of ``length`` samples whose
    centre is drawn per realization) or ``"blocks"`` (runs of ``length``
    starting at the fixed ``starts``).
    """

    kind: str = "none"
    count: int = 0
    length: int = 0
    starts: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("none", "random", "block", "blocks"):
            raise ValueError(f"unknown missing-data kind {self.kind!r}")
        if self.kind == "random" and self.count < 1:
            raise ValueError("random pattern needs count >= 1")
        if self.kind in ("block", "blocks") and self.length < 1:
            raise ValueError(f"{self.kind} pattern needs length >= 1")
        if self.kind == "blocks" and not self.starts:
            raise ValueError("blocks pattern needs explicit starts")
        object.__setattr__(self, "starts", tuple(int(s) for s in self.starts))

    def missing_count(self, n: int) -> int:
        if self.kind == "none":
            return 0
        if self.kind == "random":
            return self.count
        if self.kind == "block":
            return self.length
        return int((self.weights(n, None) == 0).sum())

    def weights(self, n: int, rng: np.random.Generator | None) -> np.ndarray:
        w = np.ones(n)
        if self.kind == "random":
            w[rng.choice(n, size=self.count, replace=False)] = 0
        elif self.kind == "block":
            if self.length > n:
                raise ValueError(f"block of {self.length} does not fit {n} samples")
            half = self.length // 2
            centre = int(rng.integers(half, n - (self.length - half) + 1))
            w[centre - half : centre - half + self.length] = 0
        elif self.kind == "blocks":
            for s in self.starts:
                if s < 0 or s + self.length > n:
                    raise ValueError(f"block [{s}, {s + self.length}) outside [0, {n})")
                w[s : s + self.length] = 0
        return w


@dataclass(frozen=True)
class EstimatorSpec:
    """``kind`` is ``"admm"`` (uses ``admm``) or ``"esprit"`` (uses ``subspace_rows``)."""

    kind: str = "admm"
    admm: AdmmConfig | None = None
    subspace_rows: int | None = None

    def __post_init__(self):
        if self.kind not in ("admm", "esprit"):
            raise ValueError(f"unknown estimator {self.kind!r}")

    def estimate(self, signal: SampledSignal, rank: int) -> NodeSet:
        if self.kind == "esprit":
            return esprit(signal, rank, self.subspace_rows)
        config = self.admm or AdmmConfig(rank=rank)
        if config.rank != rank:
            config = replace(config, rank=rank)
        result = solve(signal, config)
        return extract_nodes(result.hankel, rank)


@dataclass(frozen=True)
class Scenario:
    model: PhysicalModel
    grid: SampleGrid
    snr_db: float
    realizations: int = 100
    missing: MissingPattern = MissingPattern()
    estimator: EstimatorSpec = EstimatorSpec()
    seed: int = 0
    random_phases: bool = False

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        n = self.grid.length
        if self.missing.missing_count(n) >= n - 2 * self.model.order:
            raise ValueError(
                f"{self.missing.missing_count(n)} missing samples leave too few for "
                f"{self.model.order} components"
            )
        if self.estimator.kind == "esprit" and self.missing.kind != "none":
            raise UnsupportedInputError("ESPRIT cannot be run on missing-data scenarios")


@dataclass
class EstimationReport:
    """Per-parameter statistics in the units of the time axis.

    ``std``/``bias`` exclude outliers; ``std_all``/``bias_all`` use every
    successful realization. ``estimates`` holds matched ``(nu, gamma)``
    per realization with NaN rows for failures.
    """

    truth_freqs: np.ndarray
    truth_dampings: np.ndarray
    std_freqs: np.ndarray
    std_dampings: np.ndarray
    bias_freqs: np.ndarray
    bias_dampings: np.ndarray
    std_all_freqs: np.ndarray
    std_all_dampings: np.ndarray
    max_err_freqs: np.ndarray
    max_err_dampings: np.ndarray
    sqrt_crb_freqs: np.ndarray
    sqrt_crb_dampings: np.ndarray
    est_freqs: np.ndarray = field(repr=False)
    est_dampings: np.ndarray = field(repr=False)
    outlier: np.ndarray = field(repr=False)
    failures: int = 0
    failure_messages: list[str] = field(default_factory=list, repr=False)

    @property
    def outliers(self) -> int:
        return int(self.outlier.sum())


def _realization_seeds(seed: int, count: int) -> list[tuple[int, int]]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [tuple(int(v) for v in c.generate_state(2, dtype=np.uint32)) for c in children]


def _run_one(scenario: Scenario, seeds: tuple[int, int]):
    noise_seed, aux_seed = seeds
    rng = np.random.default_rng(aux_seed)
    grid = scenario.grid
    amps = random_phases(scenario.model.amplitudes, rng) if scenario.random_phases else None
    model = scenario.model.sampled(grid, amps)
    weights = scenario.missing.weights(grid.length, rng)
    clean = synthesize(model, grid).with_missing(weights)
    noisy = add_noise(clean, NoiseSpec(scenario.snr_db, noise_seed))
    var = noise_variance(clean, scenario.snr_db)
    bound = None
    if var > 0:
        b = crb(model, grid, var, weights)
        bound = (b.freqs, b.dampings)
    try:
        est = scenario.estimator.estimate(noisy, model.order)
        matched = match_nodes(est, model.nodes).matched
        z = matched / (2 * np.pi * grid.ts)
        return z.imag, z.real, bound, None
    except (EstimationError, np.linalg.LinAlgError) as exc:
        return None, None, bound, f"{type(exc).__name__}: {exc}"


def outlier_threshold(freqs) -> float:
    """Half the smallest spacing between true frequencies."""
    f = np.sort(np.asarray(freqs, dtype=float))
    if f.size < 2:
        return math.inf
    return float(np.min(np.diff(f))) / 2


def _stats(est: np.ndarray, truth: np.ndarray, keep: np.ndarray):
    rows = est[keep]
    if rows.shape[0] == 0:
        nan = np.full(truth.size, np.nan)
        return nan, nan
    bias = rows.mean(axis=0) - truth
    std = rows.std(axis=0, ddof=1) if rows.shape[0] > 1 else np.zeros(truth.size)
    return std, bias


def monte_carlo(scenario: Scenario, workers: int = 1) -> EstimationReport:
    """Run every realization of ``scenario`` and summarize against the bounds.

    Results depend only on the scenario (including its seed), not on
    ``workers``.
    """
    seeds = _realization_seeds(scenario.seed, scenario.realizations)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, [scenario] * len(seeds), seeds))
    else:
        records = [_run_one(scenario, s) for s in seeds]

    truth = scenario.model
    P = truth.order
    R = len(records)
    est_f = np.full((R, P), np.nan)
    est_g = np.full((R, P), np.nan)
    crb_f, crb_g = [], []
    messages = []
    for k, (fr, dm, bound, msg) in enumerate(records):
        if msg is not None:
            messages.append(msg)
        else:
            est_f[k], est_g[k] = fr, dm
        if bound is not None:
            crb_f.append(bound[0])
            crb_g.append(bound[1])

    ok = ~np.isnan(est_f).any(axis=1)
    err_f = np.abs(est_f - truth.freqs)
    outlier = np.zeros(R, dtype=bool)
    outlier[ok] = (err_f[ok] > outlier_threshold(truth.freqs)).any(axis=1)
    inlier = ok & ~outlier

    std_f, bias_f = _stats(est_f, truth.freqs, inlier)
    std_g, bias_g = _stats(est_g, truth.dampings, inlier)
    std_all_f, _ = _stats(est_f, truth.freqs, ok)
    std_all_g, _ = _stats(est_g, truth.dampings, ok)
    if ok.any():
        max_f = err_f[ok].max(axis=0)
        max_g = np.abs(est_g - truth.dampings)[ok].max(axis=0)
    else:
        max_f = max_g = np.full(P, np.nan)
    # bounds vary with the missing pattern and phases, so average the variances
    sqrt_crb_f = np.sqrt(np.mean(crb_f, axis=0)) if crb_f else np.zeros(P)
    sqrt_crb_g = np.sqrt(np.mean(crb_g, axis=0)) if crb_g else np.zeros(P)

    return EstimationReport(
        truth_freqs=truth.freqs,
        truth_dampings=truth.dampings,
        std_freqs=std_f,
        std_dampings=std_g,
        bias_freqs=bias_f,
        bias_dampings=bias_g,
        std_all_freqs=std_all_f,
        std_all_dampings=std_all_g,
        max_err_freqs=max_f,
        max_err_dampings=max_g,
        sqrt_crb_freqs=sqrt_crb_f,
        sqrt_crb_dampings=sqrt_crb_g,
        est_freqs=est_f,
        est_dampings=est_g,
        outlier=outlier,
        failures=int((~ok).sum()),
        failure_messages=messages,
    )
