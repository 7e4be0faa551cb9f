"""Signal files and experiment configuration files."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .admm import STOP_MODES, AdmmConfig
from .evaluation import EstimatorSpec, MissingPattern, Scenario
from .signal import PRESETS, PhysicalModel, SampledSignal, SampleGrid


class SignalFileError(ValueError):
    """The signal file is missing or malformed."""


class ConfigError(ValueError):
    """The experiment configuration is invalid."""


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_signal(path, signal: SampledSignal) -> None:
    grid = signal.grid
    lines = [f"# t0={fmt(grid.t0)}", f"# ts={fmt(grid.ts)}"]
    for j, (z, w) in enumerate(zip(signal.samples, signal.weights)):
        lines.append(f"{j},{fmt(z.real)},{fmt(z.imag)},{fmt(w)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_signal(path) -> SampledSignal:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SignalFileError(f"cannot read {path}: {exc.strerror or exc}") from exc

    header = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (3, 4):
            raise SignalFileError(f"{path}:{lineno}: expected 3 or 4 columns, got {len(parts)}")
        try:
            j = int(parts[0])
            vals = [float(p) for p in parts[1:]]
        except ValueError:
            raise SignalFileError(f"{path}:{lineno}: non-numeric field") from None
        rows.append((j, *vals, 1.0) if len(vals) == 2 else (j, *vals))

    if not rows:
        raise SignalFileError(f"{path}: no samples")
    idx = np.array([r[0] for r in rows])
    if not np.array_equal(idx, np.arange(idx.size)):
        raise SignalFileError(f"{path}: sample indices must be 0, 1, ..., 2N in order")
    if idx.size % 2 == 0 or idx.size < 3:
        raise SignalFileError(f"{path}: need an odd number (>= 3) of samples, got {idx.size}")
    data = np.array([r[1:] for r in rows], dtype=float)
    n_half = (idx.size - 1) // 2
    try:
        t0 = float(header.get("t0", 0.0))
        ts = float(header.get("ts", 1.0))
        grid = SampleGrid(t0, ts, n_half)
        return SampledSignal(data[:, 0] + 1j * data[:, 1], data[:, 2], grid)
    except ValueError as exc:
        raise SignalFileError(f"{path}: {exc}") from None


SECTION_KEYS = {
    "model": {"preset", "freqs", "dampings", "amplitudes", "phases", "random_phases"},
    "grid": {"n_half", "t0", "ts"},
    "noise": {"snr_db", "seed", "realizations"},
    "missing": {"kind", "count", "length", "starts"},
    "estimator": {"methods", "rho", "iters", "eps_abs", "eps_rel", "stop_mode", "esprit_rows"},
    "output": {"dir", "prefix"},
}


@dataclass
class ExperimentConfig:
    model: PhysicalModel
    grid: SampleGrid
    snr_grid: list[float]
    realizations: int
    seed: int
    missing: MissingPattern
    estimators: dict[str, EstimatorSpec]
    random_phases: bool = False
    output_dir: Path = Path(".")
    prefix: str = "benchmark"
    raw: dict = field(default_factory=dict, repr=False)

    def scenario(self, snr_db: float, method: str) -> Scenario:
        return Scenario(
            model=self.model,
            grid=self.grid,
            snr_db=snr_db,
            realizations=self.realizations,
            missing=self.missing,
            estimator=self.estimators[method],
            seed=self.seed,
            random_phases=self.random_phases,
        )


def _snr(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(value)


def _model_section(sec: dict) -> PhysicalModel:
    if "preset" in sec:
        extra = {"freqs", "dampings", "amplitudes", "phases"} & set(sec)
        if extra:
            raise ConfigError(f"model.preset cannot be combined with model.{sorted(extra)[0]}")
        name = sec["preset"]
        if name not in PRESETS:
            raise ConfigError(f"model.preset: unknown preset {name!r} (choose from {sorted(PRESETS)})")
        return PRESETS[name]
    for key in ("freqs", "dampings"):
        if key not in sec:
            raise ConfigError(f"model.{key} is required without a preset")
    freqs = np.asarray(sec["freqs"], float)
    amps = np.asarray(sec.get("amplitudes", np.ones(freqs.size)), float)
    phases = np.asarray(sec.get("phases", np.zeros(amps.size)), float)
    if amps.shape != phases.shape:
        raise ConfigError("model.phases must match model.amplitudes in length")
    try:
        return PhysicalModel(freqs, sec["dampings"], amps * np.exp(1j * phases))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None


def parse_config(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of sections")
    for name, sec in raw.items():
        if name not in SECTION_KEYS:
            raise ConfigError(f"unknown section {name!r}")
        if sec is None:
            continue
        if not isinstance(sec, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        for key in sec:
            if key not in SECTION_KEYS[name]:
                raise ConfigError(f"unknown key {name}.{key}")
    sec = {name: raw.get(name) or {} for name in SECTION_KEYS}

    model = _model_section(sec["model"])
    g = sec["grid"]
    if "n_half" not in g:
        raise ConfigError("grid.n_half is required")
    try:
        n_half = int(g["n_half"])
        default = SampleGrid.unit_interval(n_half)
        grid = SampleGrid(float(g.get("t0", default.t0)), float(g.get("ts", default.ts)), n_half)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}") from None

    noise = sec["noise"]
    snr = noise.get("snr_db", math.inf)
    snr_grid = [_snr(v) for v in (snr if isinstance(snr, list) else [snr])]
    if "seed" not in noise:
        raise ConfigError("noise.seed is required (no implicit seeding)")
    seed = int(noise["seed"])
    realizations = int(noise.get("realizations", 100))

    try:
        missing = MissingPattern(**sec["missing"]) if sec["missing"] else MissingPattern()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"missing: {exc}") from None

    est = sec["estimator"]
    methods = est.get("methods", ["admm"])
    if isinstance(methods, str):
        methods = [methods]
    stop_mode = est.get("stop_mode", "fixed")
    if stop_mode not in STOP_MODES:
        raise ConfigError(f"estimator.stop_mode must be one of {STOP_MODES}")
    estimators = {}
    for m in methods:
        if m == "admm":
            try:
                cfg = AdmmConfig(
                    rank=model.order,
                    rho=float(est.get("rho", 1.0)),
                    max_iters=int(est.get("iters", 200)),
                    eps_abs=float(est.get("eps_abs", 1e-8)),
                    eps_rel=float(est.get("eps_rel", 1e-6)),
                    stop_mode=stop_mode,
                )
            except ValueError as exc:
                raise ConfigError(f"estimator: {exc}") from None
            estimators[m] = EstimatorSpec("admm", admm=cfg)
        elif m == "esprit":
            rows = est.get("esprit_rows")
            estimators[m] = EstimatorSpec("esprit", subspace_rows=None if rows is None else int(rows))
        else:
            raise ConfigError(f"estimator.methods: unknown method {m!r}")

    out = sec["output"]
    out_dir = Path(out.get("dir", "."))
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    config = ExperimentConfig(
        model=model,
        grid=grid,
        snr_grid=snr_grid,
        realizations=realizations,
        seed=seed,
        missing=missing,
        estimators=estimators,
        random_phases=bool(sec["model"].get("random_phases", False)),
        output_dir=out_dir,
        prefix=str(out.get("prefix", "benchmark")),
        raw=raw,
    )
    try:
        for method in estimators:
            config.scenario(snr_grid[0], method)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(raw, base_dir=path.parent)


REPORT_COLUMNS = (
    "snr_db", "parameter", "std", "sqrt_crb", "bias", "outliers",
    "std_all", "max_abs_error", "failures",
)


def report_rows(snr_db: float, report) -> list[list[str]]:
    rows = []
    for prefix, std, crb_, bias, std_all, mx in (
        ("nu", report.std_freqs, report.sqrt_crb_freqs, report.bias_freqs,
         report.std_all_freqs, report.max_err_freqs),
        ("gamma", report.std_dampings, report.sqrt_crb_dampings, report.bias_dampings,
         report.std_all_dampings, report.max_err_dampings),
    ):
        for p in range(std.size):
            rows.append([
                fmt(snr_db), f"{prefix}_{p}", fmt(std[p]), fmt(crb_[p]), fmt(bias[p]),
                str(report.outliers), fmt(std_all[p]), fmt(mx[p]), str(report.failures),
            ])
    return rows


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
