"""Command-line interface: ``estimate``, ``benchmark`` and ``synthesize``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .admm import AdmmConfig, solve
from .errors import EstimationError
from .evaluation import MissingPattern, monte_carlo
from .io import (
    REPORT_COLUMNS,
    ConfigError,
    SignalFileError,
    fmt,
    load_config,
    read_signal,
    report_rows,
    write_signal,
    write_table,
)
from .nodes import extract_nodes, nodes_to_physical, select_order
from .signal import PRESETS, NoiseSpec, PhysicalModel, SampleGrid, add_noise, solve_amplitudes, synthesize

log = logging.getLogger("hankel_admm")

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BAD_CONFIG = 3
EXIT_NUMERICAL = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _add_admm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float, default=1.0, help="ADMM penalty (default: 1.0)")
    p.add_argument("--iters", type=int, default=200, help="maximum ADMM iterations (default: 200)")
    p.add_argument("--stop", choices=("fixed", "residual"), default="fixed",
                   help="run all iterations or stop on small residuals")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hankel-admm",
        description="Estimate damped complex exponentials with Hankel-rank ADMM.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate nodes from a signal file")
    est.add_argument("signal", type=Path)
    order = est.add_mutually_exclusive_group(required=True)
    order.add_argument("--rank", type=int, help="model order P")
    order.add_argument("--rank-threshold", type=float,
                       help="choose P from Hankel singular values above this fraction of the largest")
    _add_admm_flags(est)
    est.add_argument("--output", type=Path, help="write machine-readable results here")
    est.add_argument("--seed", type=int, default=0, help="accepted for symmetry; estimation is deterministic")

    bench = sub.add_parser("benchmark", help="run a Monte-Carlo experiment from a config file")
    bench.add_argument("config", type=Path)
    bench.add_argument("--seed", type=int, help="override noise.seed")
    bench.add_argument("--output", type=Path, help="override output.dir")
    bench.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    syn = sub.add_parser("synthesize", help="write a synthetic signal file")
    syn.add_argument("--config", type=Path, help="take model/grid/missing from a config file")
    syn.add_argument("--preset", choices=sorted(PRESETS))
    syn.add_argument("--freqs", type=_float_list, help="frequencies nu_p (time-axis units)")
    syn.add_argument("--dampings", type=_float_list, help="dampings gamma_p (time-axis units)")
    syn.add_argument("--amplitudes", type=_float_list, help="amplitude moduli |c_p| (default 1)")
    syn.add_argument("--phases", type=_float_list, help="amplitude phases in radians (default 0)")
    syn.add_argument("--n-half", type=int, help="N; the signal has 2N+1 samples")
    syn.add_argument("--t0", type=float, help="time of the first sample (default -1/2)")
    syn.add_argument("--ts", type=float, help="sampling period (default 1/(2N))")
    syn.add_argument("--snr-db", type=float, default=math.inf, help="noise level (default: no noise)")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--missing-random", type=int, metavar="COUNT", help="drop COUNT random samples")
    syn.add_argument("--missing-block", type=int, metavar="LENGTH",
                     help="drop one block of LENGTH samples (random centre, or at --missing-starts)")
    syn.add_argument("--missing-starts", type=_int_list, help="start indices of dropped blocks")
    syn.add_argument("--output", type=Path, required=True)
    return parser


def cmd_estimate(args) -> int:
    try:
        signal = read_signal(args.signal)
    except SignalFileError as exc:
        raise CliError(EXIT_BAD_INPUT, str(exc)) from None
    grid = signal.grid
    if args.rank is not None:
        rank = args.rank
        if not 0 <= rank <= grid.n_half:
            raise CliError(EXIT_BAD_CONFIG,
                           f"--rank {rank} must lie in [0, {grid.n_half}] for N={grid.n_half}")
    else:
        if not 0 < args.rank_threshold < 1:
            raise CliError(EXIT_BAD_CONFIG, "--rank-threshold must lie in (0, 1)")
        rank = min(select_order(signal, args.rank_threshold), grid.n_half)
        log.info("selected model order %d", rank)

    try:
        config = AdmmConfig(rank=rank, rho=args.rho, max_iters=args.iters, stop_mode=args.stop)
    except ValueError as exc:
        raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
    result = solve(signal, config)
    log.info("ADMM ran %d iterations (converged=%s)", result.iterations_run, result.converged)
    try:
        nodes = extract_nodes(result.hankel, rank)
        amps = solve_amplitudes(nodes.nodes, signal)
    except EstimationError as exc:
        raise CliError(EXIT_NUMERICAL, str(exc)) from None

    phys = nodes_to_physical(nodes, grid)
    # amplitudes refer to t = 0, matching the continuous-time model
    amps = amps * np.exp(-nodes.nodes * grid.t0 / grid.ts)
    order = np.argsort(phys.freqs, kind="stable")
    rows = [(phys.freqs[i], phys.dampings[i], abs(amps[i]), float(np.angle(amps[i]))) for i in order]

    print(f"{'nu':>14} {'gamma':>14} {'|c|':>14} {'phase':>14}")
    for row in rows:
        print(" ".join(f"{v:14.6g}" for v in row))

    if args.output is not None:
        header = ["nu", "gamma", "abs_c", "phase", "re_c", "im_c"]
        table = [
            [fmt(nu), fmt(g), fmt(a), fmt(ph), fmt(amps[i].real), fmt(amps[i].imag)]
            for i, (nu, g, a, ph) in zip(order, rows)
        ]
        write_table(args.output, header, table)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
    if args.seed is not None:
        config.seed = args.seed
    out_dir = args.output if args.output is not None else config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    for method in config.estimators:
        rows = []
        for snr in config.snr_grid:
            try:
                scenario = config.scenario(snr, method)
            except ValueError as exc:
                raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
            log.info("%s at %s dB: %d realizations", method, snr, scenario.realizations)
            report = monte_carlo(scenario, workers=args.workers)
            if report.failures:
                log.warning("%s at %s dB: %d failed realizations", method, snr, report.failures)
            rows.extend(report_rows(snr, report))
        path = out_dir / f"{config.prefix}_{method}.csv"
        write_table(path, REPORT_COLUMNS, rows)
        print(path)
    return EXIT_OK


def _synth_model(args) -> tuple[PhysicalModel, SampleGrid, MissingPattern]:
    missing = MissingPattern()
    if args.config is not None:
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
        return config.model, config.grid, config.missing

    if args.preset is not None:
        if args.freqs or args.dampings or args.amplitudes:
            raise CliError(EXIT_BAD_CONFIG, "--preset cannot be combined with --freqs/--dampings/--amplitudes")
        model = PRESETS[args.preset]
    else:
        if args.freqs is None:
            raise CliError(EXIT_BAD_CONFIG, "give --preset, --config or --freqs")
        freqs = np.asarray(args.freqs)
        damps = np.zeros(freqs.size) if args.dampings is None else np.asarray(args.dampings)
        mags = np.ones(freqs.size) if args.amplitudes is None else np.asarray(args.amplitudes)
        phases = np.zeros(mags.size) if args.phases is None else np.asarray(args.phases)
        if not (freqs.size == damps.size == mags.size == phases.size):
            raise CliError(EXIT_BAD_CONFIG,
                           "--freqs, --dampings, --amplitudes and --phases must have equal lengths")
        model = PhysicalModel(freqs, damps, mags * np.exp(1j * phases))

    if args.n_half is None:
        raise CliError(EXIT_BAD_CONFIG, "--n-half is required without --config")
    try:
        default = SampleGrid.unit_interval(args.n_half)
        grid = SampleGrid(
            default.t0 if args.t0 is None else args.t0,
            default.ts if args.ts is None else args.ts,
            args.n_half,
        )
        if args.missing_random is not None and args.missing_block is not None:
            raise ValueError("--missing-random and --missing-block are exclusive")
        if args.missing_random is not None:
            missing = MissingPattern("random", count=args.missing_random)
        elif args.missing_block is not None:
            if args.missing_starts:
                missing = MissingPattern("blocks", length=args.missing_block, starts=args.missing_starts)
            else:
                missing = MissingPattern("block", length=args.missing_block)
        elif args.missing_starts:
            raise ValueError("--missing-starts needs --missing-block")
    except ValueError as exc:
        raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
    return model, grid, missing


def cmd_synthesize(args) -> int:
    model, grid, missing = _synth_model(args)
    try:
        sampled = model.sampled(grid)
        if missing.missing_count(grid.length) >= grid.length:
            raise ValueError("missing pattern removes every sample")
        rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0])
        weights = missing.weights(grid.length, rng)
        signal = synthesize(sampled, grid).with_missing(weights)
        signal = add_noise(signal, NoiseSpec(args.snr_db, args.seed))
    except ValueError as exc:
        raise CliError(EXIT_BAD_CONFIG, str(exc)) from None
    write_signal(args.output, signal)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "benchmark": cmd_benchmark, "synthesize": cmd_synthesize}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
