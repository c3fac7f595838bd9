#!/usr/bin/env python3
"""
Window Engine

Slides fixed-length windows over a long series, evaluates ordinal functions
on a delay grid inside each window and assembles (delay x window) maps with
a mask for undefined and gated cells, the partition maps of Delta^2 and
per-window summaries.
"""

import os
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from exceptions import DegenerateWindowError, DomainError
from ordinal_functions import autocorr, beta_pairwise, ordinal_values, partition
from pattern_counter import (BOUNDARY_MODES, LINEAR, SeriesLike, as_values,
                             count_pairs, count_patterns3, to_frequencies)
from stats_inference import delta_sq_null_bound, estimate_c_per_delay, large_delay_warning

logger = logging.getLogger(__name__)

THREADS_ENV = "ORDINAL_SCAN_THREADS"

VALUE_STATS = ("beta", "tau", "gamma", "delta", "epsilon", "delta_sq", "entropy", "divergence")
PARTITION_STATS = ("tau_tilde", "beta_tilde", "gamma_tilde", "delta_tilde", "residual")
STAT_NAMES = VALUE_STATS + ("beta_pair", "rho") + PARTITION_STATS

# Cells of these stats are masked when Delta^2 falls below the gate
GATED_STATS = ("delta_sq",) + PARTITION_STATS


@dataclass(frozen=True)
class WindowPlan:
    """
    How to cut a series into windows and which delays to evaluate.

    Args:
        window_length: Samples per window n, at least 3
        step: Samples between window starts; step == window_length gives disjoint windows
        delay_grid: Strictly increasing delays, the largest at most (n-1)//2
        boundary_mode: "linear" or "cyclic" counting inside each window
        gate_threshold: Delta^2 gate, defaults to 15/n
    """

    window_length: int
    step: int
    delay_grid: Tuple[int, ...]
    boundary_mode: str = LINEAR
    gate_threshold: Optional[float] = None

    def __post_init__(self):
        n = self.window_length
        if n < 3:
            raise DomainError(f"Window length must be at least 3, got {n}")
        if self.step < 1:
            raise DomainError(f"Step must be at least 1, got {self.step}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise DomainError(f"Unknown boundary mode: {self.boundary_mode}")

        grid = tuple(int(d) for d in self.delay_grid)
        if not grid:
            raise DomainError("Delay grid is empty")
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError(f"Delay grid must be strictly increasing positive integers: {grid}")
        if grid[-1] > (n - 1) // 2:
            raise DomainError(f"Largest delay {grid[-1]} exceeds (n-1)//2 = {(n - 1) // 2}")
        object.__setattr__(self, "delay_grid", grid)

        if self.gate_threshold is None:
            object.__setattr__(self, "gate_threshold", delta_sq_null_bound(n)[1])
        elif self.gate_threshold < 0:
            raise DomainError(f"Gate threshold must be non-negative, got {self.gate_threshold}")

    def n_windows(self, T: int) -> int:
        if T < self.window_length:
            return 0
        return (T - self.window_length) // self.step + 1

    def window_starts(self, T: int) -> np.ndarray:
        return np.arange(self.n_windows(T)) * self.step


@dataclass
class WindowMap:
    """
    Values of one statistic on the (delay x window) grid.

    Rows follow plan.delay_grid, columns the windows. Masked cells hold NaN.
    """

    values: np.ndarray
    mask: np.ndarray
    stat_name: str
    plan: WindowPlan
    window_start_times: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def masked_fraction(self) -> float:
        return float(self.mask.mean()) if self.mask.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        """Rows indexed by delay, columns by window start sample."""
        return pd.DataFrame(self.values, index=pd.Index(self.plan.delay_grid, name="d"),
                            columns=pd.Index(self.window_start_times, name="start"))


@dataclass(frozen=True)
class WindowSummary:
    window: int
    start: int
    mean_abs_amplitude: float
    mean_delta_sq: float
    ungated_fraction: float


@dataclass
class PartitionMapResult:
    """
    The four partition maps with their shared gate mask and overall averages.

    Args:
        maps: tau_tilde, beta_tilde, gamma_tilde, delta_tilde and residual maps
        corrected_averages: Mean of each component over ungated cells
        all_averages: Mean of each component over every cell with Delta^2 > 0
        gated_fraction: Share of cells gated or undefined
    """

    maps: Dict[str, WindowMap]
    corrected_averages: Dict[str, float]
    all_averages: Dict[str, float]
    gated_fraction: float

    @property
    def mean_residual(self) -> float:
        return self.corrected_averages["residual"]

    def __getitem__(self, name: str) -> WindowMap:
        return self.maps[name]


def evaluate_cell(window: np.ndarray, d: int, mode: str, gate_threshold: float,
                  stat_names: Sequence[str]) -> Dict[str, float]:
    """
    Evaluate the requested statistics of one window at one delay.

    Undefined results (no valid triple, zero variance, gated partition) are NaN.
    The returned dict also carries "_delta_sq" and "_gated" for masking.
    """
    nan = float("nan")
    out = dict.fromkeys(stat_names, nan)
    out["_delta_sq"] = nan
    out["_gated"] = True

    if "beta_pair" in out:
        pairs = count_pairs(window, d, mode)
        if pairs.valid:
            out["beta_pair"] = beta_pairwise(pairs)

    if "rho" in out:
        try:
            out["rho"] = autocorr(window, d)
        except DegenerateWindowError:
            pass

    hist = count_patterns3(window, d, mode)
    if hist.S == 0:
        return out

    v = ordinal_values(to_frequencies(hist))
    gated = v.delta_sq < gate_threshold
    out["_delta_sq"] = v.delta_sq
    out["_gated"] = gated

    for name in VALUE_STATS:
        if name in out:
            out[name] = getattr(v, name)

    if any(name in out for name in PARTITION_STATS) and v.delta_sq > 0:
        # the gate is applied by the caller so ungated ratios stay available
        parts = partition(v, 0.0)
        for name in PARTITION_STATS:
            if name in out:
                out[name] = getattr(parts, name)
    return out


class OrdinalWindowEngine:
    """
    Evaluates ordinal statistics over sliding windows of a series.

    Windows are independent work items and are spread over a thread pool;
    results are placed by window index so the output does not depend on the
    evaluation order.
    """

    def __init__(self, threads: Optional[int] = None):
        """
        Initialize the OrdinalWindowEngine.

        Args:
            threads: Worker count; defaults to ORDINAL_SCAN_THREADS or the CPU count
        """
        if threads is None:
            env_threads = os.environ.get(THREADS_ENV)
            threads = int(env_threads) if env_threads else (os.cpu_count() or 1)
        if threads < 1:
            raise DomainError(f"Thread count must be at least 1, got {threads}")
        self.threads = threads

        logger.info(f"Initialized OrdinalWindowEngine with {self.threads} worker(s)")

    def _windows(self, x: SeriesLike, plan: WindowPlan) -> Tuple[np.ndarray, np.ndarray]:
        values = as_values(x)
        starts = plan.window_starts(values.size)
        if starts.size == 0:
            raise DomainError(
                f"Series of length {values.size} has no complete window of length {plan.window_length}"
            )
        large_delay_warning(plan.delay_grid[-1], plan.window_length)
        return values, starts

    def _evaluate(self, values: np.ndarray, starts: np.ndarray, plan: WindowPlan,
                  stat_names: Sequence[str]) -> List[Dict[str, np.ndarray]]:
        """Evaluate every window; returns one dict of delay-indexed arrays per window."""
        n = plan.window_length

        def column(start: int) -> Dict[str, np.ndarray]:
            window = values[start:start + n]
            cells = [evaluate_cell(window, d, plan.boundary_mode, plan.gate_threshold, stat_names)
                     for d in plan.delay_grid]
            return {key: np.array([c[key] for c in cells], dtype=float) for key in cells[0]}

        if self.threads == 1 or starts.size == 1:
            return [column(int(s)) for s in starts]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(column, (int(s) for s in starts)))

    def _assemble(self, columns: List[Dict[str, np.ndarray]], key: str, stat_name: str,
                  plan: WindowPlan, starts: np.ndarray, gate: bool) -> WindowMap:
        values = np.column_stack([c[key] for c in columns])
        mask = np.isnan(values)
        if gate:
            mask |= np.column_stack([c["_gated"] for c in columns]).astype(bool)
            values = np.where(mask, np.nan, values)
        return WindowMap(values=values, mask=mask, stat_name=stat_name,
                         plan=plan, window_start_times=starts.copy())

    def run_map(self, x: SeriesLike, plan: WindowPlan, stat: str) -> WindowMap:
        """
        Compute one statistic for every window and delay.

        Args:
            x: Input series
            plan: Window plan
            stat: One of STAT_NAMES

        Returns:
            WindowMap; delta_sq and partition stats are masked below the gate
        """
        if stat not in STAT_NAMES:
            raise DomainError(f"Unknown statistic: {stat}")
        values, starts = self._windows(x, plan)

        logger.info(f"Computing {stat} map: {starts.size} windows x {len(plan.delay_grid)} delays")
        columns = self._evaluate(values, starts, plan, (stat,))
        wmap = self._assemble(columns, stat, stat, plan, starts, gate=stat in GATED_STATS)

        logger.info(f"{stat} map done, {wmap.masked_fraction:.1%} of cells masked")
        return wmap

    def run_partition_map(self, x: SeriesLike, plan: WindowPlan) -> PartitionMapResult:
        """
        Compute the normalized partition components of Delta^2 for every window and delay.

        All component maps share one mask (gated or undefined cells). Averages
        are means of per-cell ratios.
        """
        values, starts = self._windows(x, plan)

        logger.info(f"Computing partition maps: {starts.size} windows x {len(plan.delay_grid)} delays")
        columns = self._evaluate(values, starts, plan, PARTITION_STATS)

        maps = {}
        corrected, overall = {}, {}
        for name in PARTITION_STATS:
            raw = self._assemble(columns, name, name, plan, starts, gate=False)
            gated = self._assemble(columns, name, name, plan, starts, gate=True)
            maps[name] = gated
            overall[name] = _nanmean(raw.values)
            corrected[name] = _nanmean(gated.values)

        shared_mask = maps["tau_tilde"].mask
        for name in PARTITION_STATS:
            maps[name].mask = shared_mask.copy()
            maps[name].values = np.where(shared_mask, np.nan, maps[name].values)

        gated_fraction = float(shared_mask.mean())
        if gated_fraction == 1.0:
            logger.warning("Every cell is gated; partition averages are undefined")

        logger.info(f"Partition maps done: corrected tau_tilde={corrected['tau_tilde']:.4f}, "
                    f"gated fraction={gated_fraction:.1%}")
        return PartitionMapResult(maps=maps, corrected_averages=corrected,
                                  all_averages=overall, gated_fraction=gated_fraction)

    def run_summary(self, x: SeriesLike, plan: WindowPlan,
                    band: Tuple[int, int]) -> List[WindowSummary]:
        """
        Per-window mean |x|, mean Delta^2 over a delay band and ungated fraction.

        Args:
            x: Input series
            plan: Window plan
            band: Inclusive (lowest, highest) delay; delays taken from plan.delay_grid

        Returns:
            One WindowSummary per window
        """
        band_delays = tuple(d for d in plan.delay_grid if band[0] <= d <= band[1])
        if not band_delays:
            raise DomainError(f"Delay band {band} contains no delay of the plan grid")

        band_plan = WindowPlan(window_length=plan.window_length, step=plan.step,
                               delay_grid=band_delays, boundary_mode=plan.boundary_mode,
                               gate_threshold=plan.gate_threshold)
        values, starts = self._windows(x, band_plan)
        columns = self._evaluate(values, starts, band_plan, ("delta_sq",))

        summaries = []
        for i, (start, col) in enumerate(zip(starts, columns)):
            window = values[start:start + plan.window_length]
            present = window[~np.isnan(window)]
            delta_sq = col["_delta_sq"]
            ungated = np.count_nonzero(~np.isnan(delta_sq) & (delta_sq >= plan.gate_threshold))
            summaries.append(WindowSummary(
                window=i,
                start=int(start),
                mean_abs_amplitude=float(np.abs(present).mean()) if present.size else math.nan,
                mean_delta_sq=_nanmean(delta_sq),
                ungated_fraction=ungated / len(band_delays),
            ))

        logger.info(f"Computed summaries for {len(summaries)} windows over delays {band_delays[0]}..{band_delays[-1]}")
        return summaries

    def error_profile(self, x: SeriesLike, plan: WindowPlan, stat: str = "beta") -> pd.DataFrame:
        """
        Estimate c and sigma = c/sqrt(n) for each delay from the spread across windows.

        Meaningful for non-overlapping windows of a stationary stretch.
        """
        if plan.step < plan.window_length:
            logger.warning("Overlapping windows make the c estimate optimistic")
        wmap = self.run_map(x, plan, stat)
        c = estimate_c_per_delay(wmap.values, plan.window_length)
        return pd.DataFrame({
            "d": list(plan.delay_grid),
            "c": c.values,
            "sigma": c.values / math.sqrt(plan.window_length),
        })


def _nanmean(values: np.ndarray) -> float:
    finite = values[~np.isnan(values)]
    return float(finite.mean()) if finite.size else math.nan


def summaries_to_frame(summaries: Sequence[WindowSummary]) -> pd.DataFrame:
    return pd.DataFrame([asdict(s) for s in summaries],
                        columns=["window", "start", "mean_abs_amplitude",
                                 "mean_delta_sq", "ungated_fraction"])


def run_map(x: SeriesLike, plan: WindowPlan, stat: str) -> WindowMap:
    return OrdinalWindowEngine().run_map(x, plan, stat)


def run_partition_map(x: SeriesLike, plan: WindowPlan) -> PartitionMapResult:
    return OrdinalWindowEngine().run_partition_map(x, plan)


def run_summary(x: SeriesLike, plan: WindowPlan, band: Tuple[int, int]) -> List[WindowSummary]:
    return OrdinalWindowEngine().run_summary(x, plan, band)
