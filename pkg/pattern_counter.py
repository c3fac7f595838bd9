#!/usr/bin/env python3
"""
Pattern Counter for Ordinal Time Series Analysis

This module extracts and counts order patterns of length 2, 3 and general
order n from raw series. Ties and missing values are excluded from the
histograms and reported separately, in linear and cyclic boundary modes.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from exceptions import DegenerateWindowError, DomainError

logger = logging.getLogger(__name__)

LINEAR = "linear"
CYCLIC = "cyclic"
BOUNDARY_MODES = (LINEAR, CYCLIC)

# Symbol s = 2*((y0>y1)+(y0>y2))+(y1>y2) indexes these patterns
PATTERN_LABELS = ("123", "132", "213", "231", "312", "321")

MAX_ORDER = 7

MISSING_POLICIES = ("propagate", "skip-missing")


@dataclass(frozen=True)
class TimeSeries:
    """
    A real-valued series x_1..x_T with NaN as the missing marker.

    Args:
        values: Sample values; NaN marks a missing entry
        sample_rate_hz: Optional sampling rate, metadata only
        imputed: Optional mask of positions that a preprocessing step filled in
    """

    values: np.ndarray
    sample_rate_hz: Optional[float] = None
    imputed: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size < 1:
            raise DomainError("A time series needs at least one value")
        if np.isinf(values).any():
            raise DomainError("Series values must be finite reals or NaN")
        if self.sample_rate_hz is not None and not self.sample_rate_hz > 0:
            raise DomainError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (self.sample_rate_hz == other.sample_rate_hz
                and np.array_equal(self.values, other.values, equal_nan=True))

    @property
    def T(self) -> int:
        return len(self)

    @property
    def missing_count(self) -> int:
        return int(np.isnan(self.values).sum())


SeriesLike = Union[TimeSeries, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class PairCounts:
    """Counts of increases (n12), decreases (n21) and excluded pairs at one delay."""

    n12: int
    n21: int
    excluded: int
    d: int
    boundary_mode: str = LINEAR

    @property
    def valid(self) -> int:
        return self.n12 + self.n21


@dataclass(frozen=True)
class PatternHistogram:
    """
    Counts of the six length-3 patterns at one delay.

    Args:
        counts: Six counts indexed by symbol 0..5 (123, 132, 213, 231, 312, 321)
        excluded_ties: Triples containing a tie and no missing value
        excluded_missing: Triples touching at least one missing value
        d: Delay in samples
        boundary_mode: "linear" or "cyclic"
    """

    counts: Tuple[int, ...]
    excluded_ties: int
    excluded_missing: int
    d: int
    boundary_mode: str = LINEAR

    @property
    def S(self) -> int:
        return int(sum(self.counts))

    @property
    def positions(self) -> int:
        return self.S + self.excluded_ties + self.excluded_missing

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(PATTERN_LABELS, self.counts))


@dataclass(frozen=True)
class PatternFrequencies:
    """Relative frequencies p_pi = n_pi / S of the six patterns."""

    p: Tuple[float, ...]
    S: int
    d: int

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(PATTERN_LABELS, self.p))


@dataclass(frozen=True)
class OrderNHistogram:
    """
    Counts of the n! order patterns of (x_t, x_{t+d}, ..., x_{t+(n-1)d}).

    Index k is the lexicographic rank of the rank vector, so 12...n has index 0.
    """

    n: int
    counts: Tuple[int, ...]
    excluded_ties: int
    excluded_missing: int
    d: int
    boundary_mode: str = LINEAR

    @property
    def excluded(self) -> int:
        return self.excluded_ties + self.excluded_missing

    @property
    def total(self) -> int:
        return int(sum(self.counts))


def as_values(x: SeriesLike) -> np.ndarray:
    """Return the float64 values of a TimeSeries or array-like."""
    if isinstance(x, TimeSeries):
        return x.values
    return TimeSeries(x).values


def _check_mode(mode: str) -> None:
    if mode not in BOUNDARY_MODES:
        raise DomainError(f"Unknown boundary mode: {mode}")


def _check_delay(d: int) -> int:
    if isinstance(d, (bool, np.bool_)) or int(d) != d:
        raise DomainError(f"Delay must be an integer, got {d!r}")
    d = int(d)
    if d < 1:
        raise DomainError(f"Delay must be at least 1, got {d}")
    return d


def embed(values: np.ndarray, d: int, n: int, mode: str = LINEAR) -> np.ndarray:
    """
    Build the delay-embedding matrix with rows (x_t, x_{t+d}, ..., x_{t+(n-1)d}).

    Args:
        values: Series values
        d: Delay in samples
        n: Embedding length
        mode: "linear" (t = 1..T-(n-1)d) or "cyclic" (t = 1..T, indices mod T)

    Returns:
        Array of shape (positions, n)
    """
    T = values.size
    if mode == LINEAR:
        m = T - (n - 1) * d
        if m < 1:
            raise DomainError(
                f"Series of length {T} is too short for order {n} at delay {d}"
            )
        return np.stack([values[k * d:k * d + m] for k in range(n)], axis=1)

    idx = np.arange(T)
    return np.stack([values[(idx + k * d) % T] for k in range(n)], axis=1)


def count_pairs(x: SeriesLike, d: int, mode: str = LINEAR) -> PairCounts:
    """
    Count increases and decreases between x_t and x_{t+d}.

    Args:
        x: Input series
        d: Delay, 1 <= d <= T-1 (linear) or 1 <= d <= T (cyclic)
        mode: Boundary mode

    Returns:
        PairCounts; ties and pairs touching a missing value are excluded
    """
    _check_mode(mode)
    d = _check_delay(d)
    values = as_values(x)
    T = values.size

    if mode == LINEAR:
        if d > T - 1:
            raise DomainError(f"Delay {d} out of range for linear pairs on T={T}")
        a, b = values[:T - d], values[d:]
    else:
        if d > T:
            raise DomainError(f"Delay {d} out of range for cyclic pairs on T={T}")
        a, b = values, np.roll(values, -d)

    n12 = int(np.count_nonzero(a < b))
    n21 = int(np.count_nonzero(a > b))
    return PairCounts(n12=n12, n21=n21, excluded=int(a.size) - n12 - n21,
                      d=d, boundary_mode=mode)


def pattern_symbols(x: SeriesLike, d: int,
                    mode: str = LINEAR) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Encode every triple (x_t, x_{t+d}, x_{t+2d}) as a symbol 0..5.

    Returns:
        (symbols, tie_mask, missing_mask); symbols are only meaningful where
        both masks are False. Missing takes precedence over ties.
    """
    _check_mode(mode)
    d = _check_delay(d)
    values = as_values(x)
    if mode == LINEAR and values.size - 2 * d < 1:
        raise DomainError(f"Delay {d} out of range for triples on T={values.size}")

    triples = embed(values, d, 3, mode)
    y0, y1, y2 = triples[:, 0], triples[:, 1], triples[:, 2]

    symbols = 2 * ((y0 > y1).astype(np.int8) + (y0 > y2)) + (y1 > y2)
    missing = np.isnan(triples).any(axis=1)
    ties = ~missing & ((y0 == y1) | (y0 == y2) | (y1 == y2))
    return symbols, ties, missing


def count_patterns3(x: SeriesLike, d: int, mode: str = LINEAR) -> PatternHistogram:
    """
    Count the six order patterns of length 3 at delay d.

    Args:
        x: Input series
        d: Delay; linear mode needs T - 2d >= 1
        mode: Boundary mode

    Returns:
        PatternHistogram with tie and missing exclusions
    """
    symbols, ties, missing = pattern_symbols(x, d, mode)
    valid = ~(ties | missing)
    counts = np.bincount(symbols[valid], minlength=6)
    return PatternHistogram(
        counts=tuple(int(c) for c in counts),
        excluded_ties=int(np.count_nonzero(ties)),
        excluded_missing=int(np.count_nonzero(missing)),
        d=int(d),
        boundary_mode=mode,
    )


def to_frequencies(h: PatternHistogram) -> PatternFrequencies:
    """
    Convert pattern counts to relative frequencies.

    Raises:
        DegenerateWindowError: If no valid triple was counted
    """
    S = h.S
    if S == 0:
        raise DegenerateWindowError(f"No valid triples at delay {h.d}")
    return PatternFrequencies(p=tuple(c / S for c in h.counts), S=S, d=h.d)


def embed_ranks(x: SeriesLike, d: int, n: int,
                mode: str = LINEAR) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Compute the lexicographic pattern index of every length-n window.

    The index is the Lehmer code of the rank vector: digit i counts the later
    entries smaller than entry i.

    Returns:
        (codes, tie_mask, missing_mask)
    """
    _check_mode(mode)
    d = _check_delay(d)
    if not 2 <= n <= MAX_ORDER:
        raise DomainError(f"Pattern order must be between 2 and {MAX_ORDER}, got {n}")

    emb = embed(as_values(x), d, n, mode)
    missing = np.isnan(emb).any(axis=1)

    ties = np.zeros(emb.shape[0], dtype=bool)
    codes = np.zeros(emb.shape[0], dtype=np.int64)
    for i in range(n):
        smaller_later = np.zeros(emb.shape[0], dtype=np.int64)
        for j in range(i + 1, n):
            smaller_later += emb[:, j] < emb[:, i]
            ties |= emb[:, j] == emb[:, i]
        codes += smaller_later * math.factorial(n - 1 - i)

    return codes, ties & ~missing, missing


def count_patterns_n(x: SeriesLike, d: int, n: int, mode: str = LINEAR) -> OrderNHistogram:
    """
    Count the n! order patterns at delay d, 2 <= n <= 7.

    Windows with any tie or missing value are excluded.
    """
    codes, ties, missing = embed_ranks(x, d, n, mode)
    valid = ~(ties | missing)
    counts = np.bincount(codes[valid], minlength=math.factorial(n))
    return OrderNHistogram(
        n=n,
        counts=tuple(int(c) for c in counts),
        excluded_ties=int(np.count_nonzero(ties)),
        excluded_missing=int(np.count_nonzero(missing)),
        d=int(d),
        boundary_mode=mode,
    )


def cumulative_preprocess(x: SeriesLike, policy: str = "propagate") -> TimeSeries:
    """
    Replace the series by its running sums.

    Args:
        x: Input series
        policy: "propagate" makes every sum after a missing value missing;
            "skip-missing" treats missing values as 0 and flags them

    Returns:
        TimeSeries of cumulative sums; with "skip-missing" the filled
        positions are recorded in ``imputed``
    """
    if policy not in MISSING_POLICIES:
        raise DomainError(f"Unknown missing-value policy: {policy}")

    sample_rate = x.sample_rate_hz if isinstance(x, TimeSeries) else None
    values = as_values(x)

    if policy == "propagate":
        return TimeSeries(np.cumsum(values), sample_rate_hz=sample_rate)

    imputed = np.isnan(values)
    if imputed.any():
        logger.warning(f"Treating {int(imputed.sum())} missing values as 0 in cumulative sums")
    return TimeSeries(np.nancumsum(values), sample_rate_hz=sample_rate, imputed=imputed)


def reverse_series(x: SeriesLike) -> TimeSeries:
    """Return x in reversed time order."""
    return TimeSeries(as_values(x)[::-1].copy())


def negate_series(x: SeriesLike) -> TimeSeries:
    """Return -x."""
    return TimeSeries(-as_values(x))
