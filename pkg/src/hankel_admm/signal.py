"""Damped complex exponential signal model.

Nodes are stored per sample index: a component contributes
``c * exp(zeta * j)`` to sample ``j``. Physical parameters (damping ``gamma``
and frequency ``nu`` in units of the time axis) are related through
``zeta = 2*pi*(gamma + 1j*nu) * ts``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError

# Relative condition number above which the amplitude regression is refused.
AMPLITUDE_COND_LIMIT = 1e12


def _as_complex_vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=complex))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class SampleGrid:
    """Uniform grid ``t0 + j*ts`` for ``0 <= j <= 2*n_half``."""

    t0: float
    ts: float
    n_half: int

    def __post_init__(self):
        if not (math.isfinite(self.ts) and self.ts > 0):
            raise ValueError(f"sampling period must be positive, got {self.ts}")
        if not math.isfinite(self.t0):
            raise ValueError("t0 must be finite")
        if int(self.n_half) != self.n_half or self.n_half < 1:
            raise ValueError(f"n_half must be an integer >= 1, got {self.n_half}")
        object.__setattr__(self, "n_half", int(self.n_half))

    @classmethod
    def unit_interval(cls, n_half: int) -> "SampleGrid":
        """Grid of ``2*n_half + 1`` points covering ``[-1/2, 1/2]`` inclusive."""
        return cls(t0=-0.5, ts=1.0 / (2 * n_half), n_half=n_half)

    @property
    def length(self) -> int:
        return 2 * self.n_half + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.length)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.indices * self.ts


@dataclass(frozen=True)
class ExponentialModel:
    """Amplitudes and per-sample nodes of ``sum_p c_p exp(zeta_p j)``."""

    nodes: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        nodes = _as_complex_vector(self.nodes, "nodes")
        amps = _as_complex_vector(self.amplitudes, "amplitudes")
        if nodes.size < 1:
            raise ValueError("model needs at least one component")
        if nodes.size != amps.size:
            raise ValueError(
                f"nodes and amplitudes differ in length ({nodes.size} != {amps.size})"
            )
        diff = np.abs(nodes[:, None] - nodes[None, :])
        np.fill_diagonal(diff, np.inf)
        if np.any(diff == 0):
            raise ValueError("nodes must be pairwise distinct")
        nodes.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def order(self) -> int:
        return self.nodes.size

    @classmethod
    def from_physical(cls, freqs, dampings, amplitudes, grid: SampleGrid) -> "ExponentialModel":
        """Build the sampled model of ``f(t) = sum_p c_p exp(2*pi*(gamma_p + i nu_p) t)``.

        The amplitudes refer to ``t = 0``; they are moved to the first grid
        point so that ``synthesize`` reproduces ``f(t0 + j*ts)``.
        """
        freqs = np.asarray(freqs, dtype=float)
        dampings = np.asarray(dampings, dtype=float)
        zeta_phys = 2 * np.pi * (dampings + 1j * freqs)
        amps = np.asarray(amplitudes, dtype=complex) * np.exp(zeta_phys * grid.t0)
        return cls(nodes=zeta_phys * grid.ts, amplitudes=amps)

    def physical_amplitudes(self, grid: SampleGrid) -> np.ndarray:
        """Amplitudes referred back to ``t = 0`` (inverse of ``from_physical``)."""
        return self.amplitudes * np.exp(-self.nodes / grid.ts * grid.t0)


@dataclass(frozen=True)
class SampledSignal:
    samples: np.ndarray
    weights: np.ndarray
    grid: SampleGrid

    def __post_init__(self):
        samples = _as_complex_vector(self.samples, "samples")
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if samples.shape != (self.grid.length,) or weights.shape != (self.grid.length,):
            raise ValueError(
                f"samples/weights must have length {self.grid.length}, "
                f"got {samples.shape} and {weights.shape}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        samples.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_samples(cls, samples, grid: SampleGrid | None = None, weights=None) -> "SampledSignal":
        samples = np.asarray(samples, dtype=complex)
        if grid is None:
            if samples.size % 2 == 0:
                raise ValueError("sample count must be odd")
            grid = SampleGrid(0.0, 1.0, (samples.size - 1) // 2)
        if weights is None:
            weights = np.ones(samples.size)
        return cls(samples, weights, grid)

    @property
    def observed(self) -> np.ndarray:
        return self.weights > 0

    def with_missing(self, weights) -> "SampledSignal":
        """Replace the weights and zero the samples whose weight is 0."""
        weights = np.asarray(weights, dtype=float)
        return SampledSignal(np.where(weights > 0, self.samples, 0), weights, self.grid)


@dataclass(frozen=True)
class NoiseSpec:
    """Circular white Gaussian noise at a given SNR; ``inf`` disables noise."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"invalid SNR {self.snr_db}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


def synthesize(model: ExponentialModel, grid: SampleGrid) -> SampledSignal:
    vander = np.exp(np.outer(grid.indices, model.nodes))
    return SampledSignal(vander @ model.amplitudes, np.ones(grid.length), grid)


def noise_variance(signal: SampledSignal, snr_db: float) -> float:
    """Noise variance giving ``snr_db`` relative to the mean observed power."""
    if snr_db == math.inf:
        return 0.0
    observed = signal.observed
    if not observed.any():
        return 0.0
    power = float(np.mean(np.abs(signal.samples[observed]) ** 2))
    return power / 10 ** (snr_db / 10)


def add_noise(signal: SampledSignal, spec: NoiseSpec) -> SampledSignal:
    """Add seeded circular complex Gaussian noise to the observed samples."""
    if spec.snr_db == math.inf:
        return signal
    var = noise_variance(signal, spec.snr_db)
    rng = np.random.default_rng(spec.seed)
    n = signal.grid.length
    noise = math.sqrt(var / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise[~signal.observed] = 0
    return SampledSignal(signal.samples + noise, signal.weights, signal.grid)


def solve_amplitudes(nodes, signal: SampledSignal) -> np.ndarray:
    """Weighted least-squares amplitudes for fixed nodes."""
    nodes = _as_complex_vector(nodes, "nodes")
    if nodes.size == 0:
        return np.zeros(0, dtype=complex)
    sw = np.sqrt(signal.weights)
    keep = sw > 0
    if keep.sum() < nodes.size:
        raise IllConditionedError(
            f"{keep.sum()} observed samples cannot determine {nodes.size} amplitudes"
        )
    design = np.exp(np.outer(signal.grid.indices[keep], nodes)) * sw[keep, None]
    if not np.all(np.isfinite(design)):
        raise IllConditionedError("node growth overflows the design matrix")
    # column scaling keeps fast-growing or fast-decaying nodes from dominating cond()
    scale = np.linalg.norm(design, axis=0)
    if np.any(scale == 0):
        raise IllConditionedError("design matrix has a vanishing column")
    design = design / scale
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= sv[0] / AMPLITUDE_COND_LIMIT:
        raise IllConditionedError(
            f"amplitude design matrix is ill-conditioned (cond={sv[0] / max(sv[-1], 1e-300):.3g})"
        )
    coef, *_ = np.linalg.lstsq(design, signal.samples[keep] * sw[keep], rcond=None)
    return coef / scale


def nls_objective(signal: SampledSignal, model: ExponentialModel) -> float:
    model_samples = synthesize(model, signal.grid).samples
    return float(np.sum(signal.weights * np.abs(signal.samples - model_samples) ** 2))


def random_phases(amplitudes, rng: np.random.Generator) -> np.ndarray:
    """Keep the moduli of ``amplitudes`` and draw uniform phases."""
    mags = np.abs(np.asarray(amplitudes, dtype=complex))
    return mags * np.exp(2j * np.pi * rng.random(mags.size))


@dataclass(frozen=True)
class PhysicalModel:
    """Model parameters in the units of the time axis, amplitudes at ``t = 0``."""

    freqs: np.ndarray
    dampings: np.ndarray
    amplitudes: np.ndarray | None = None

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        damps = np.atleast_1d(np.asarray(self.dampings, dtype=float))
        amps = self.amplitudes
        amps = np.ones(freqs.size, complex) if amps is None else np.atleast_1d(np.asarray(amps, complex))
        if not (freqs.size == damps.size == amps.size):
            raise ValueError(
                f"freqs, dampings and amplitudes differ in length "
                f"({freqs.size}, {damps.size}, {amps.size})"
            )
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "dampings", damps)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def order(self) -> int:
        return self.freqs.size

    def sampled(self, grid: SampleGrid, amplitudes=None) -> ExponentialModel:
        amps = self.amplitudes if amplitudes is None else amplitudes
        return ExponentialModel.from_physical(self.freqs, self.dampings, amps, grid)


# Test parameters with four and seven components (amplitude moduli only).
FOUR_TONE = PhysicalModel(
    freqs=[1.86, 6.59, 7.49, 19.84],
    dampings=[0.40, -0.56, 0.08, -0.45],
    amplitudes=[1.00, 0.40, 1.50, 0.70],
)
SEVEN_TONE = PhysicalModel(
    freqs=[1.86, 3.84, 5.95, 7.49, 9.60, 19.84, 30.08],
    dampings=[0.05, 0.14, 0.06, 0.01, 0.16, 0.08, 0.07],
    amplitudes=[1.00, 0.40, 1.50, 0.70, 0.60, 1.20, 1.00],
)
PRESETS = {"four-tone": FOUR_TONE, "seven-tone": SEVEN_TONE}
