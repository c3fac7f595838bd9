#!/usr/bin/env python3
"""
Run Ordinal Scan

Command line entry point: whole-series profiles, window maps, partition maps,
window summaries, identity checks, the median test and synthetic series.

Exit codes: 0 on success, 1 on data errors, 2 on usage errors.
"""

import os
import sys
import logging
import argparse
from dataclasses import asdict
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from exceptions import OrdinalScanError
from ordinal_functions import check_identities, entropy_profile, ordinal_profile
from pattern_counter import CYCLIC, TimeSeries, cumulative_preprocess
from scan_config import ScanConfig, load_config
from series_io import (MapExportFormat, SeriesFileFormat, export_map, load_series,
                       save_series, write_report, write_table)
from signal_models import (DisturbanceSpec, GeneratorSpec, GENERATOR_KINDS,
                           WAVEFORMS, disturb, generate)
from stats_inference import median_test
from window_engine import (STAT_NAMES, OrdinalWindowEngine, WindowPlan,
                           summaries_to_frame)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

MAP_FORMAT_CHOICES = {"csv": "csv_matrix", "pgm": "pgm_p5"}
SERIES_FORMAT_CHOICES = {"csv": "csv_single_column", "csv2": "csv_two_column_time_value",
                         "raw": "raw_f64le"}


def configure_logging(config: ScanConfig) -> None:
    """Configure the root logger once: a log file plus the console."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.log_file:
        handlers.insert(0, logging.FileHandler(config.log_file))
    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_scan",
        description="Ordinal pattern functions, permutation entropy and distance to white noise",
    )
    parser.add_argument("--config", type=str, help="key=value configuration file")

    series_opts = argparse.ArgumentParser(add_help=False)
    series_opts.add_argument("input", type=str, help="Series file")
    series_opts.add_argument("--format", choices=sorted(SERIES_FORMAT_CHOICES),
                             help="Series file format (csv, csv2 = time,value, raw = float64 LE)")
    series_opts.add_argument("--missing-token", type=str, help="Token marking missing values")
    series_opts.add_argument("--cumsum", action="store_true", default=None,
                             help="Replace the series by its cumulative sums first")
    series_opts.add_argument("--missing-policy", choices=["propagate", "skip-missing"],
                             help="Missing values in cumulative sums")
    series_opts.add_argument("--hz", type=float,
                             help="Sampling rate; window, step and delay flags are then in seconds")
    series_opts.add_argument("-o", "--output", type=str, help="Output file (stdout if omitted)")

    delay_opts = argparse.ArgumentParser(add_help=False)
    delay_opts.add_argument("--delay-min", type=float, help="Smallest delay")
    delay_opts.add_argument("--delay-max", type=float, help="Largest delay")
    delay_opts.add_argument("--gate", type=float, help="Delta^2 gate (default 15/n)")
    delay_opts.add_argument("--cyclic", action="store_true", default=None,
                            help="Count patterns cyclically")

    window_opts = argparse.ArgumentParser(add_help=False)
    window_opts.add_argument("--window", type=float, help="Window length n")
    window_opts.add_argument("--step", type=float, help="Window step (default n)")
    window_opts.add_argument("--threads", type=int, help="Worker threads")

    map_opts = argparse.ArgumentParser(add_help=False)
    map_opts.add_argument("--map-format", choices=sorted(MAP_FORMAT_CHOICES), help="Map file format")
    map_opts.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"),
                          help="Value range scaled to 0..255 in PGM output")

    sub = parser.add_subparsers(dest="command", required=True)

    profile = sub.add_parser("profile", parents=[series_opts, delay_opts],
                             help="Ordinal functions of the whole series per delay")
    profile.add_argument("--order", type=int, default=3,
                         help="Pattern order; other than 3 gives entropy, divergence and Delta^2 only")

    map_cmd = sub.add_parser("map", parents=[series_opts, delay_opts, window_opts, map_opts],
                             help="Window map of one statistic")
    map_cmd.add_argument("--stat", choices=STAT_NAMES, default="beta", help="Statistic to map")

    part = sub.add_parser("partition", parents=[series_opts, delay_opts, window_opts, map_opts],
                          help="Partition maps of Delta^2 and their averages")
    part.add_argument("--output-dir", type=str, default=".", help="Directory for the four maps")

    summary = sub.add_parser("summary", parents=[series_opts, delay_opts, window_opts],
                             help="Per-window mean |x| and band-averaged Delta^2")
    summary.add_argument("--band-min", type=float, help="Lowest delay of the band")
    summary.add_argument("--band-max", type=float, help="Highest delay of the band")

    sub.add_parser("identities", parents=[series_opts, delay_opts],
                   help="Discrepancies of the pattern identities per delay")

    median = sub.add_parser("mediantest", help="Exact binomial median test of window values")
    median.add_argument("input", type=str, help="File with one window value per line")
    median.add_argument("--format", choices=sorted(SERIES_FORMAT_CHOICES))
    median.add_argument("--sided", choices=["one", "two"],
                        help="One-sided (default) or two-sided test")
    median.add_argument("--direction", choices=["greater", "less"],
                        help="Direction of the one-sided test (default greater)")
    median.add_argument("-o", "--output", type=str)

    sim = sub.add_parser("simulate", help="Write a synthetic series")
    sim.add_argument("--kind", choices=[k for k in GENERATOR_KINDS if k != "from_series"],
                     default="ar2")
    sim.add_argument("--length", type=int, required=True)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--a1", type=float, default=1.85)
    sim.add_argument("--a2", type=float, default=-0.96)
    sim.add_argument("--noise-std", type=float, default=1.0)
    sim.add_argument("--period", type=int, default=100)
    sim.add_argument("--waveform", choices=WAVEFORMS, default="sine")
    sim.add_argument("--phase", type=float, default=0.0)
    sim.add_argument("--disturb", action="append", default=[],
                     help="noise:SNR | outliers:FRACTION:SIGMAS | lowfreq:SCALE[:AMPLITUDE] | exp:SCALE")
    sim.add_argument("--format", choices=sorted(SERIES_FORMAT_CHOICES))
    sim.add_argument("-o", "--output", type=str, required=True)

    return parser


def _samples(parser: argparse.ArgumentParser, name: str, value: Optional[float],
             hz: Optional[float]) -> Optional[int]:
    """Convert a flag to samples: seconds times hz when --hz is given, else an integer count."""
    if value is None:
        return None
    if hz:
        return int(round(value * hz))
    if value != int(value):
        parser.error(f"--{name} must be an integer number of samples (or use --hz)")
    return int(value)


def _resolve_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> ScanConfig:
    config = load_config(args.config)
    hz = getattr(args, "hz", None)

    if args.command == "mediantest":
        if args.direction and args.sided == "two":
            parser.error("--direction applies to one-sided tests only")
        args.sided = args.sided or "one"

    if args.command == "summary":
        args.band_min = _samples(parser, "band-min", args.band_min, hz)
        args.band_max = _samples(parser, "band-max", args.band_max, hz)

    overrides = {
        "window": _samples(parser, "window", getattr(args, "window", None), hz),
        "step": _samples(parser, "step", getattr(args, "step", None), hz),
        "delay_min": _samples(parser, "delay-min", getattr(args, "delay_min", None), hz),
        "delay_max": _samples(parser, "delay-max", getattr(args, "delay_max", None), hz),
        "gate": getattr(args, "gate", None),
        "boundary_mode": CYCLIC if getattr(args, "cyclic", None) else None,
        "cumsum": getattr(args, "cumsum", None),
        "missing_policy": getattr(args, "missing_policy", None),
        "missing_token": getattr(args, "missing_token", None),
        "threads": getattr(args, "threads", None),
        "seed": getattr(args, "seed", None),
    }
    if getattr(args, "format", None):
        overrides["series_format"] = SERIES_FORMAT_CHOICES[args.format]
    if getattr(args, "map_format", None):
        overrides["map_format"] = MAP_FORMAT_CHOICES[args.map_format]
    if getattr(args, "range", None):
        overrides["value_range"] = tuple(args.range)
    return config.override(**overrides)


def _load(args: argparse.Namespace, config: ScanConfig) -> TimeSeries:
    fmt = SeriesFileFormat(format=config.series_format, missing_token=config.missing_token)
    series = load_series(args.input, fmt, sample_rate_hz=getattr(args, "hz", None))
    if config.cumsum:
        series = cumulative_preprocess(series, policy=config.missing_policy)
    return series


def _delays(config: ScanConfig) -> range:
    return range(config.delay_min, config.delay_max + 1)


def _plan(config: ScanConfig) -> WindowPlan:
    return WindowPlan(window_length=config.window, step=config.effective_step,
                      delay_grid=tuple(_delays(config)), boundary_mode=config.boundary_mode,
                      gate_threshold=config.gate)


def cmd_profile(args, config: ScanConfig) -> None:
    series = _load(args, config)
    if args.order == 3:
        table = ordinal_profile(series, _delays(config), mode=config.boundary_mode,
                                gate_threshold=config.gate)
    else:
        table = entropy_profile(series, _delays(config), args.order, mode=config.boundary_mode)
    write_table(table, args.output)


def cmd_map(args, config: ScanConfig) -> None:
    series = _load(args, config)
    engine = OrdinalWindowEngine(threads=config.threads)
    wmap = engine.run_map(series, _plan(config), args.stat)
    if args.output is None:
        write_table(pd.DataFrame(np.where(wmap.mask, np.nan, wmap.values)))
        return
    export_map(wmap, MapExportFormat(format=config.map_format, value_range=config.value_range),
               args.output)


def cmd_partition(args, config: ScanConfig) -> None:
    series = _load(args, config)
    engine = OrdinalWindowEngine(threads=config.threads)
    plan = _plan(config)
    result = engine.run_partition_map(series, plan)

    # components are shares, so the image range is fixed to 0..1
    fmt = MapExportFormat(format=config.map_format, value_range=(0.0, 1.0))
    extension = "csv" if fmt.format == "csv_matrix" else "pgm"
    files = {}
    for name, wmap in result.maps.items():
        files[name] = export_map(wmap, fmt, os.path.join(args.output_dir, f"{name}.{extension}"))

    report = {
        "window_length": plan.window_length,
        "step": plan.step,
        "delays": [plan.delay_grid[0], plan.delay_grid[-1]],
        "gate_threshold": plan.gate_threshold,
        "windows": int(result.maps["tau_tilde"].shape[1]),
        "gated_fraction": result.gated_fraction,
        "corrected": result.corrected_averages,
        "all": result.all_averages,
        "mean_residual": result.mean_residual,
        "files": files,
    }
    write_report(report, args.output)


def cmd_summary(args, config: ScanConfig) -> None:
    series = _load(args, config)
    band = (args.band_min if args.band_min is not None else config.delay_min,
            args.band_max if args.band_max is not None else config.delay_max)
    engine = OrdinalWindowEngine(threads=config.threads)
    summaries = engine.run_summary(series, _plan(config), band)
    write_table(summaries_to_frame(summaries), args.output)


def cmd_identities(args, config: ScanConfig) -> None:
    series = _load(args, config)
    rows = []
    for d in _delays(config):
        report = check_identities(series, d, mode=config.boundary_mode)
        rows.append({**asdict(report), "within_bounds": report.within_bounds})
    write_table(pd.DataFrame(rows), args.output)


def cmd_mediantest(args, config: ScanConfig) -> None:
    fmt = SeriesFileFormat(format=config.series_format, missing_token=config.missing_token)
    values = load_series(args.input, fmt).values
    result = median_test(values, sided=args.sided, alternative=args.direction)
    write_report(asdict(result), args.output)


def parse_disturbance(text: str, seed: int) -> DisturbanceSpec:
    """Parse noise:SNR, outliers:FRACTION:SIGMAS, lowfreq:SCALE[:AMPLITUDE] or exp:SCALE."""
    kind, *params = text.split(":")
    try:
        numbers = [float(p) for p in params]
        if kind == "noise":
            return DisturbanceSpec("additive_white_noise", seed=seed, snr=numbers[0])
        if kind == "outliers":
            return DisturbanceSpec("outliers", seed=seed, fraction=numbers[0],
                                   amplitude_in_sigmas=numbers[1])
        if kind == "lowfreq":
            amplitude = numbers[1] if len(numbers) > 1 else 1.0
            return DisturbanceSpec("low_freq", seed=seed, period_scale=numbers[0],
                                   amplitude=amplitude)
        if kind == "exp":
            return DisturbanceSpec("monotone_transform", seed=seed, scale=numbers[0])
    except (ValueError, IndexError):
        pass
    raise argparse.ArgumentTypeError(f"Invalid disturbance: {text!r}")


def cmd_simulate(args, config: ScanConfig) -> None:
    params = {"a1": args.a1, "a2": args.a2, "noise_std": args.noise_std,
              "period": args.period, "waveform": args.waveform, "phase": args.phase}
    spec = GeneratorSpec(kind=args.kind, length=args.length, seed=config.seed, params=params)
    series = generate(spec)
    for i, text in enumerate(args.disturb):
        series = disturb(series, parse_disturbance(text, seed=config.seed + 1 + i))
    save_series(series, args.output,
                SeriesFileFormat(format=config.series_format, missing_token=config.missing_token))


COMMANDS = {
    "profile": cmd_profile,
    "map": cmd_map,
    "partition": cmd_partition,
    "summary": cmd_summary,
    "identities": cmd_identities,
    "mediantest": cmd_mediantest,
    "simulate": cmd_simulate,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            for text in args.disturb:
                parse_disturbance(text, seed=0)
        config = _resolve_config(parser, args)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    except argparse.ArgumentTypeError as e:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 2
    except OrdinalScanError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 2

    configure_logging(config)
    logger.info(f"Running {args.command}")

    try:
        COMMANDS[args.command](args, config)
    except (OrdinalScanError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1

    logger.info(f"{args.command} completed successfully")
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
