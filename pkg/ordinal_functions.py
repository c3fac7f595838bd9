#!/usr/bin/env python3
"""
Ordinal Functions

Scalar functions of the pattern distribution at one delay: up-down balance
beta, persistence tau, time irreversibility gamma, up-down scaling delta,
epsilon, the distance to white noise Delta^2, permutation entropy H and its
divergence D. Also the normalized partition of Delta^2, the classical
autocorrelation for comparison, and the boundary identities between the
pair and triple counts.
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from exceptions import (AllPairsExcludedError, DegenerateWindowError,
                        DivisionGuardError, DomainError)
from pattern_counter import (CYCLIC, LINEAR, OrderNHistogram, PairCounts,
                             PatternFrequencies, SeriesLike, as_values,
                             count_pairs, count_patterns3, count_patterns_n,
                             to_frequencies)
from stats_inference import delta_sq_null_bound

logger = logging.getLogger(__name__)

LOG6 = math.log(6.0)
MAX_DELTA_SQ = 5.0 / 6.0


@dataclass(frozen=True)
class OrdinalValues:
    """
    All functions of one length-3 pattern distribution.

    Args:
        beta: Up-down balance p123 - p321
        tau: Persistence p123 + p321 - 1/3
        gamma: Time irreversibility p213 + p231 - p132 - p312
        delta: Up-down scaling p132 + p213 - p231 - p312
        epsilon: p231 + p132 - p213 - p312, local maxima minus minima
        delta_sq: Distance to white noise, sum of (p - 1/6)^2
        entropy: Permutation entropy, natural log
        divergence: log 6 - entropy
        d: Delay
        S: Number of valid triples
        p: The six frequencies the values were computed from
        beta_pair: Pairwise beta p12 - p21, when computed from a series
    """

    beta: float
    tau: float
    gamma: float
    delta: float
    epsilon: float
    delta_sq: float
    entropy: float
    divergence: float
    d: int
    S: int
    p: Tuple[float, ...]
    beta_pair: Optional[float] = None


@dataclass(frozen=True)
class PartitionComponents:
    """
    Normalized components of 4 Delta^2 = 3tau^2 + 2beta^2 + gamma^2 + delta^2 + epsilon^2.

    When gated, the components are NaN.
    """

    tau_tilde: float
    beta_tilde: float
    gamma_tilde: float
    delta_tilde: float
    residual: float
    gated: bool
    q: Tuple[float, ...]

    @property
    def total(self) -> float:
        return self.tau_tilde + self.beta_tilde + self.gamma_tilde + self.delta_tilde


class EntropyResult(NamedTuple):
    entropy: float
    divergence: float
    delta_sq: float


@dataclass(frozen=True)
class IdentityReport:
    """
    Signed discrepancies of the pattern identities at one delay.

    Args:
        p12_forward: p12 - (p123 + p231 + p132)
        p12_backward: p12 - (p123 + p213 + p312)
        epsilon: p231 + p132 - p213 - p312
        beta_consistency: pairwise beta - (p123 - p321)
        beta_scaling: beta(2d) - (beta(d) + delta(d))
        boundary_bound: d/(T-d) in linear mode, 0 in cyclic mode
        tie_slack: Fraction of excluded pairs plus fraction of excluded triples
    """

    d: int
    boundary_mode: str
    p12_forward: float
    p12_backward: float
    epsilon: float
    beta_consistency: float
    beta_scaling: float
    boundary_bound: float
    tie_slack: float

    @property
    def within_bounds(self) -> bool:
        tol = 1e-12
        bound = self.boundary_bound + self.tie_slack + tol
        return (abs(self.p12_forward) <= bound
                and abs(self.p12_backward) <= bound
                and abs(self.beta_consistency) <= 2 * bound
                and abs(self.epsilon) <= 2 * bound)


def beta_pairwise(c: PairCounts) -> float:
    """
    Pairwise up-down balance p12 - p21.

    Raises:
        AllPairsExcludedError: If every pair was a tie or missing
    """
    if c.valid == 0:
        raise AllPairsExcludedError(f"All pairs excluded at delay {c.d}")
    return (c.n12 - c.n21) / c.valid


def ordinal_values(p: PatternFrequencies, beta_pair: Optional[float] = None) -> OrdinalValues:
    """
    Compute beta, tau, gamma, delta, epsilon, Delta^2, H and D from six frequencies.

    Args:
        p: Pattern frequencies
        beta_pair: Optional pairwise beta to carry along

    Returns:
        OrdinalValues
    """
    p123, p132, p213, p231, p312, p321 = p.p

    entropy = -math.fsum(pi * math.log(pi) for pi in p.p if pi > 0)
    return OrdinalValues(
        beta=p123 - p321,
        tau=p123 + p321 - 1.0 / 3.0,
        gamma=p213 + p231 - p132 - p312,
        delta=p132 + p213 - p231 - p312,
        epsilon=p231 + p132 - p213 - p312,
        delta_sq=math.fsum((pi - 1.0 / 6.0) ** 2 for pi in p.p),
        entropy=entropy,
        divergence=max(0.0, LOG6 - entropy),
        d=p.d,
        S=p.S,
        p=tuple(p.p),
        beta_pair=beta_pair,
    )


def partition(v: OrdinalValues, gate_threshold: float) -> PartitionComponents:
    """
    Split Delta^2 into persistence, balance, irreversibility and scaling shares.

    Args:
        v: Ordinal values of one distribution
        gate_threshold: Cells with Delta^2 below this value are gated

    Returns:
        PartitionComponents; tau_tilde + beta_tilde + gamma_tilde + delta_tilde
        + residual = 1 when not gated

    Raises:
        DivisionGuardError: If Delta^2 is exactly 0 and the gate is 0
    """
    if gate_threshold < 0:
        raise DomainError(f"Gate threshold must be non-negative, got {gate_threshold}")

    q = tuple(pi - 1.0 / 6.0 for pi in v.p)

    if v.delta_sq == 0 and gate_threshold == 0:
        raise DivisionGuardError(f"Delta^2 is zero at delay {v.d}; partition undefined")

    if v.delta_sq < gate_threshold:
        nan = float("nan")
        return PartitionComponents(nan, nan, nan, nan, nan, gated=True, q=q)

    four_dsq = 4.0 * v.delta_sq
    return PartitionComponents(
        tau_tilde=3.0 * v.tau ** 2 / four_dsq,
        beta_tilde=2.0 * v.beta ** 2 / four_dsq,
        gamma_tilde=v.gamma ** 2 / four_dsq,
        delta_tilde=v.delta ** 2 / four_dsq,
        residual=v.epsilon ** 2 / four_dsq,
        gated=False,
        q=q,
    )


def taylor_entropy_approx(delta_sq: float) -> float:
    """Second-order approximation H ~ log 6 - 3 Delta^2 near white noise."""
    return LOG6 - 3.0 * delta_sq


def entropy_n(h: OrderNHistogram) -> EntropyResult:
    """
    Permutation entropy, divergence and Delta^2 for patterns of order n.

    Raises:
        DegenerateWindowError: If the histogram is empty
    """
    total = h.total
    if total == 0:
        raise DegenerateWindowError(f"No valid windows of order {h.n} at delay {h.d}")

    log_nfact = math.log(math.factorial(h.n))
    uniform = 1.0 / math.factorial(h.n)
    freqs = [c / total for c in h.counts]

    entropy = -math.fsum(p * math.log(p) for p in freqs if p > 0)
    return EntropyResult(
        entropy=entropy,
        divergence=max(0.0, log_nfact - entropy),
        delta_sq=math.fsum((p - uniform) ** 2 for p in freqs),
    )


def autocorr(x: SeriesLike, d: int) -> float:
    """
    Pearson correlation of (x_t, x_{t+d}) over pairs where both values are present.

    Returns:
        Correlation, or NaN when either side has zero variance

    Raises:
        DomainError: If d is outside 1..T-1
        DegenerateWindowError: If fewer than two complete pairs exist
    """
    values = as_values(x)
    T = values.size
    if not 1 <= d <= T - 1:
        raise DomainError(f"Delay {d} out of range for autocorrelation on T={T}")

    a, b = values[:T - d], values[d:]
    complete = ~(np.isnan(a) | np.isnan(b))
    if np.count_nonzero(complete) < 2:
        raise DegenerateWindowError(f"Fewer than two complete pairs at delay {d}")

    a = a[complete] - a[complete].mean()
    b = b[complete] - b[complete].mean()
    denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denom == 0:
        return float("nan")
    return float(np.dot(a, b)) / denom


def check_identities(x: SeriesLike, d: int, mode: str = LINEAR) -> IdentityReport:
    """
    Evaluate the identities linking pair and triple counts at delay d.

    p12 = p123+p231+p132, p12 = p123+p213+p312, epsilon = 0,
    beta = p123-p321 and beta(2d) = beta(d)+delta(d) are exact in cyclic mode
    and hold up to a boundary term of order d/(T-d) in linear mode.
    """
    values = as_values(x)
    T = values.size

    pairs = count_pairs(values, d, mode)
    pairs_2d = count_pairs(values, 2 * d, mode)
    hist = count_patterns3(values, d, mode)
    v = ordinal_values(to_frequencies(hist), beta_pair=beta_pairwise(pairs))

    p123, p132, p213, p231, p312, _ = v.p
    p12 = pairs.n12 / pairs.valid

    pair_total = pairs.valid + pairs.excluded
    tie_slack = pairs.excluded / pair_total + (hist.positions - hist.S) / hist.positions

    return IdentityReport(
        d=int(d),
        boundary_mode=mode,
        p12_forward=p12 - (p123 + p231 + p132),
        p12_backward=p12 - (p123 + p213 + p312),
        epsilon=v.epsilon,
        beta_consistency=v.beta_pair - v.beta,
        beta_scaling=beta_pairwise(pairs_2d) - (v.beta + v.delta),
        boundary_bound=0.0 if mode == CYCLIC else d / (T - d),
        tie_slack=tie_slack,
    )


def series_values(x: SeriesLike, d: int, mode: str = LINEAR) -> OrdinalValues:
    """Ordinal values of a whole series at delay d, with pairwise beta attached."""
    pairs = count_pairs(x, d, mode)
    beta_pair = beta_pairwise(pairs) if pairs.valid else None
    return ordinal_values(to_frequencies(count_patterns3(x, d, mode)), beta_pair=beta_pair)


PROFILE_COLUMNS = [
    "d", "S", "excluded_ties", "excluded_missing", "beta", "beta_pair", "tau",
    "gamma", "delta", "epsilon", "delta_sq", "entropy", "divergence", "rho",
    "tau_tilde", "beta_tilde", "gamma_tilde", "delta_tilde", "residual", "gated",
]


def ordinal_profile(x: SeriesLike,
                    delays: Iterable[int],
                    mode: str = LINEAR,
                    gate_threshold: Optional[float] = None) -> pd.DataFrame:
    """
    Tabulate every ordinal function over a range of delays.

    Args:
        x: Input series
        delays: Delays to evaluate
        mode: Boundary mode
        gate_threshold: Partition gate, defaults to 15/T

    Returns:
        DataFrame with one row per delay; undefined cells are NaN
    """
    values = as_values(x)
    if gate_threshold is None:
        gate_threshold = delta_sq_null_bound(max(values.size, 3))[1]

    rows = []
    for d in delays:
        hist = count_patterns3(values, d, mode)
        row = dict.fromkeys(PROFILE_COLUMNS, float("nan"))
        row.update(d=int(d), S=hist.S, excluded_ties=hist.excluded_ties,
                   excluded_missing=hist.excluded_missing, gated=True)

        if hist.S == 0:
            logger.warning(f"No valid triples at delay {d}; profile row left undefined")
        else:
            pairs = count_pairs(values, d, mode)
            beta_pair = beta_pairwise(pairs) if pairs.valid else None
            v = ordinal_values(to_frequencies(hist), beta_pair=beta_pair)
            row.update(beta=v.beta, tau=v.tau, gamma=v.gamma, delta=v.delta,
                       epsilon=v.epsilon, delta_sq=v.delta_sq, entropy=v.entropy,
                       divergence=v.divergence)
            if beta_pair is not None:
                row["beta_pair"] = beta_pair
            if v.delta_sq > 0 or gate_threshold > 0:
                parts = partition(v, gate_threshold)
                row.update(tau_tilde=parts.tau_tilde, beta_tilde=parts.beta_tilde,
                           gamma_tilde=parts.gamma_tilde, delta_tilde=parts.delta_tilde,
                           residual=parts.residual, gated=parts.gated)

        if d < values.size:
            try:
                row["rho"] = autocorr(values, d)
            except DegenerateWindowError:
                pass

        rows.append(row)

    return pd.DataFrame(rows, columns=PROFILE_COLUMNS)


def entropy_profile(x: SeriesLike, delays: Iterable[int], n: int,
                    mode: str = LINEAR) -> pd.DataFrame:
    """Permutation entropy H, divergence D and Delta^2 of order n for each delay."""
    rows = []
    for d in delays:
        hist = count_patterns_n(x, d, n, mode)
        if hist.total == 0:
            rows.append({"d": int(d), "n": n, "valid": 0, "entropy": np.nan,
                         "divergence": np.nan, "delta_sq": np.nan})
            continue
        result = entropy_n(hist)
        rows.append({"d": int(d), "n": n, "valid": hist.total, **result._asdict()})
    return pd.DataFrame(rows, columns=["d", "n", "valid", "entropy", "divergence", "delta_sq"])
